#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "nem/mixture.hpp"
#include "nem/noise.hpp"

namespace nem {

/// Distribution the complete data (y, z) is drawn from. The positivity
/// condition averages under the optimal parameters; the per-iteration
/// benefit statement averages under the current iterate.
enum class Conditioning { Optimal, Current };

std::string_view to_string(Conditioning c);
Conditioning parse_conditioning(std::string_view text);

/// Monte-Carlo mean with its standard error.
struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t num_draws = 0;
};

using PositivityEstimate = MonteCarloEstimate;

inline constexpr std::size_t kMinDiagnosticDraws = 100;

/// Per-draw log-ratios ln f(phi(y, n), z | current) - ln f(y, z | current)
/// with (y, z) drawn from the conditioning parameters and n from `noise`
/// evaluated against the current means.
std::vector<double> positivity_samples(const GmmParams& true_params, const GmmParams& current_params,
                                       const NoiseSpec& noise, int k, std::size_t num_draws,
                                       std::uint64_t seed,
                                       Conditioning conditioning = Conditioning::Optimal);

/// Mean and standard error of positivity_samples.
PositivityEstimate estimate_positivity(const GmmParams& true_params, const GmmParams& current_params,
                                       const NoiseSpec& noise, int k, std::size_t num_draws,
                                       std::uint64_t seed,
                                       Conditioning conditioning = Conditioning::Optimal);

/// D(f* || f_current) - D(f* || f_noisy) estimated with the same draws as
/// estimate_positivity. Positive means the noisy pdf sits closer to f*.
double relative_entropy_gap(const GmmParams& true_params, const GmmParams& current_params,
                            const NoiseSpec& noise, int k, std::size_t num_draws, std::uint64_t seed,
                            Conditioning conditioning = Conditioning::Optimal);

/// Q_N(current | true) - Q(current | true) on `data`, averaged over
/// `num_draws` independent noise vectors. Responsibilities come from the
/// noiseless data under the true parameters.
MonteCarloEstimate q_noise_benefit(const GmmParams& true_params, const GmmParams& current_params,
                                   const NoiseSpec& noise, const Dataset& data, int k,
                                   std::uint64_t seed, std::size_t num_draws = 10000);

/// Summary statistics of a sample of draws.
MonteCarloEstimate summarize(const std::vector<double>& draws);

}  // namespace nem
