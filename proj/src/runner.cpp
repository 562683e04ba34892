#include "nem/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nem {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kInitStream = 2;

bool all_finite(const GmmParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(p.weights.begin(), p.weights.end(), finite) &&
         std::all_of(p.means.begin(), p.means.end(), finite) &&
         std::all_of(p.variances.begin(), p.variances.end(), finite);
}

// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(InitStrategy init) {
  return init == InitStrategy::FixedOverdispersed ? "fixed" : "random";
}

InitStrategy parse_init_strategy(std::string_view text) {
  if (text == "fixed" || text == "fixed_overdispersed") return InitStrategy::FixedOverdispersed;
  if (text == "random" || text == "random_from_data") return InitStrategy::RandomFromData;
  throw std::invalid_argument("unknown init strategy '" + std::string(text) + "'");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::NonFiniteUpdate: return "non_finite_update";
  }
  return "iteration_cap";
}

void RunConfig::validate() const {
  if (tol_exponent < 1) throw std::invalid_argument("RunConfig: tol_exponent must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("RunConfig: max_iterations must be >= 1");
}

double RunConfig::tolerance() const { return std::pow(10.0, -tol_exponent); }

GmmParams initial_params(const Dataset& data, std::size_t k, InitStrategy init,
                         std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("initial_params: K must be >= 1");
  const auto samples = data.samples();
  const double m = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / m;
  double var = 0.0;
  for (double y : samples) var += (y - mean) * (y - mean);
  var = std::max(kVarianceFloor, var / m);

  GmmParams p;
  p.weights.assign(k, 1.0 / static_cast<double>(k));
  p.variances.assign(k, var);
  p.means.resize(k);

  if (init == InitStrategy::FixedOverdispersed) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < k; ++j)
      p.means[j] = quantile_sorted(sorted, static_cast<double>(j + 1) / static_cast<double>(k + 1));
  } else {
    Rng rng(derive_seed(seed, kInitStream));
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates; with fewer samples than components, draws repeat.
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t slot = j % idx.size();
      const std::size_t pool = idx.size() - slot;
      const auto pick = std::min(pool - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool)));
      std::swap(idx[slot], idx[slot + pick]);
      p.means[j] = samples[idx[slot]];
    }
    std::sort(p.means.begin(), p.means.end());
  }
  // Uniform weights of 1/K can miss unit sum by an ulp for some K.
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  p.weights.back() += 1.0 - total;
  return p;
}

TrialRecord run_nem(const Dataset& data, const GmmParams& init_params, const NoiseSpec& noise,
                    const RunConfig& config) {
  init_params.validate();
  noise.validate();
  config.validate();

  TrialRecord rec;
  rec.noise_spec = noise.effective();
  rec.seed = config.seed;
  rec.param_trace.push_back(init_params);
  rec.loglik_trace.push_back(mixture_log_likelihood(data, init_params));

  Rng rng(derive_seed(config.seed, kNoiseStream));
  const double tol = config.tolerance();
  const std::size_t m = data.size();
  std::vector<double> noisy(m);
  GmmParams current = init_params;

  for (int k = 1; k <= config.max_iterations; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      const double n = sample_noise(data[i], current.means, rec.noise_spec, k, rng);
      noisy[i] = inject(data[i], n, rec.noise_spec.mode);
    }
    rec.noise_scale_trace.push_back(rec.noise_spec.policy == NoisePolicy::Off
                                        ? 0.0
                                        : decay_scale(k, rec.noise_spec.sigma_n, rec.noise_spec.tau));

    if (!std::all_of(noisy.begin(), noisy.end(), [](double v) { return std::isfinite(v); })) {
      rec.stop_reason = StopReason::NonFiniteUpdate;
      break;
    }

    const ResponsibilityMatrix resp = e_step(data, current);
    const MStepResult step = m_step(Dataset(noisy), resp, current);
    if (!all_finite(step.params)) {
      rec.stop_reason = StopReason::NonFiniteUpdate;
      break;
    }
    if (step.any_degenerate()) ++rec.degenerate_steps;

    const double change = max_abs_diff(step.params, current);
    current = step.params;
    rec.iterations = k;
    rec.param_trace.push_back(current);
    rec.loglik_trace.push_back(mixture_log_likelihood(data, current));

    if (change < tol) {
      rec.converged = true;
      rec.stop_reason = StopReason::Converged;
      break;
    }
  }

  rec.final_params = current;
  return rec;
}

TrialRecord run_em(const Dataset& data, const GmmParams& init_params, const RunConfig& config) {
  return run_nem(data, init_params, NoiseSpec{}, config);
}

}  // namespace nem
