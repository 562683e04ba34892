#include "nem/diagnostics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nem {

namespace {

std::size_t draw_component(const GmmParams& p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < p.size(); ++j) {
    acc += p.weights[j];
    if (u < acc) return j;
  }
  return p.size() - 1;
}

void check_inputs(const GmmParams& true_params, const GmmParams& current_params,
                  const NoiseSpec& noise, int k) {
  true_params.validate();
  current_params.validate();
  noise.validate();
  if (true_params.size() != current_params.size())
    throw std::invalid_argument("diagnostics: true and current parameters differ in K");
  if (k < 1) throw std::invalid_argument("diagnostics: iteration index must be >= 1");
}

}  // namespace

std::string_view to_string(Conditioning c) { return c == Conditioning::Optimal ? "optimal" : "current"; }

Conditioning parse_conditioning(std::string_view text) {
  if (text == "optimal" || text == "true") return Conditioning::Optimal;
  if (text == "current") return Conditioning::Current;
  throw std::invalid_argument("unknown conditioning '" + std::string(text) + "'");
}

MonteCarloEstimate summarize(const std::vector<double>& draws) {
  MonteCarloEstimate est;
  est.num_draws = draws.size();
  if (draws.empty()) return est;
  const double n = static_cast<double>(draws.size());
  est.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  if (draws.size() > 1) {
    double ss = 0.0;
    for (double d : draws) ss += (d - est.mean) * (d - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

std::vector<double> positivity_samples(const GmmParams& true_params, const GmmParams& current_params,
                                       const NoiseSpec& noise, int k, std::size_t num_draws,
                                       std::uint64_t seed, Conditioning conditioning) {
  check_inputs(true_params, current_params, noise, k);
  if (num_draws < kMinDiagnosticDraws)
    throw std::invalid_argument("positivity_samples: at least 100 draws required");

  const GmmParams& source = conditioning == Conditioning::Optimal ? true_params : current_params;
  Rng rng(seed);
  std::vector<double> out(num_draws);
  for (auto& ratio : out) {
    const std::size_t z = draw_component(source, rng);
    const double y = source.means[z] + std::sqrt(source.variances[z]) * standard_normal(rng);
    const double n = sample_noise(y, current_params.means, noise, k, rng);
    const double y_noisy = inject(y, n, noise.mode);
    // Joint density alpha_z f(y | z); the weight cancels in the ratio.
    const double mu = current_params.means[z];
    const double var = current_params.variances[z];
    ratio = component_log_pdf(y_noisy, mu, var) - component_log_pdf(y, mu, var);
  }
  return out;
}

PositivityEstimate estimate_positivity(const GmmParams& true_params, const GmmParams& current_params,
                                       const NoiseSpec& noise, int k, std::size_t num_draws,
                                       std::uint64_t seed, Conditioning conditioning) {
  return summarize(positivity_samples(true_params, current_params, noise, k, num_draws, seed, conditioning));
}

double relative_entropy_gap(const GmmParams& true_params, const GmmParams& current_params,
                            const NoiseSpec& noise, int k, std::size_t num_draws, std::uint64_t seed,
                            Conditioning conditioning) {
  // E*[ln f*/f] - E*[ln f*/f_N] = E*[ln f_N/f]: the f* terms cancel draw by draw.
  const auto ratios = positivity_samples(true_params, current_params, noise, k, num_draws, seed, conditioning);
  return summarize(ratios).mean;
}

MonteCarloEstimate q_noise_benefit(const GmmParams& true_params, const GmmParams& current_params,
                                   const NoiseSpec& noise, const Dataset& data, int k,
                                   std::uint64_t seed, std::size_t num_draws) {
  check_inputs(true_params, current_params, noise, k);
  if (num_draws < 1) throw std::invalid_argument("q_noise_benefit: at least one draw required");

  const ResponsibilityMatrix resp = e_step(data, true_params);
  const double q_clean = compute_q(current_params, resp, data);
  Rng rng(seed);
  std::vector<double> noisy(data.size());
  std::vector<double> gains(num_draws);
  for (auto& gain : gains) {
    for (std::size_t i = 0; i < data.size(); ++i)
      noisy[i] = inject(data[i], sample_noise(data[i], current_params.means, noise, k, rng), noise.mode);
    gain = compute_q(current_params, resp, Dataset(noisy)) - q_clean;
  }
  return summarize(gains);
}

}  // namespace nem
