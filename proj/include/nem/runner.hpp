#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nem/mixture.hpp"
#include "nem/noise.hpp"

namespace nem {

enum class InitStrategy { FixedOverdispersed, RandomFromData };

std::string_view to_string(InitStrategy init);
InitStrategy parse_init_strategy(std::string_view text);

struct RunConfig {
  int tol_exponent = 2;
  int max_iterations = 500;
  InitStrategy init = InitStrategy::FixedOverdispersed;
  std::uint64_t seed = 0;

  void validate() const;
  double tolerance() const;

  bool operator==(const RunConfig&) const = default;
};

/// Why a trial stopped.
enum class StopReason { Converged, IterationCap, NonFiniteUpdate };

std::string_view to_string(StopReason reason);

/// Complete history of one EM / NEM run.
struct TrialRecord {
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::IterationCap;
  /// theta_0 .. theta_iterations.
  std::vector<GmmParams> param_trace;
  /// Log-likelihood of the noiseless data at each entry of param_trace.
  std::vector<double> loglik_trace;
  /// Noise standard deviation k^-tau * sigma_n used at iteration k = 1..iterations.
  std::vector<double> noise_scale_trace;
  /// Number of M-steps that hit an empty component.
  int degenerate_steps = 0;
  GmmParams final_params;
  NoiseSpec noise_spec;
  std::uint64_t seed = 0;

  bool operator==(const TrialRecord&) const = default;
};

/// Starting parameters for a K-component fit. FixedOverdispersed is
/// deterministic: uniform weights, means at the data quantiles j/(K+1), and
/// every variance equal to the sample variance. RandomFromData picks K
/// distinct samples as means using `seed`.
GmmParams initial_params(const Dataset& data, std::size_t k, InitStrategy init,
                         std::uint64_t seed = 0);

/// Noise-injected EM. Each iteration k draws per-sample noise at scale
/// k^-tau * sigma_n against the current means, forms y_dagger = phi(y, n),
/// computes responsibilities from the noiseless y, and runs the M-step on
/// y_dagger. Stops when the infinity-norm parameter change falls below
/// 10^-tol_exponent or at max_iterations.
TrialRecord run_nem(const Dataset& data, const GmmParams& init_params, const NoiseSpec& noise,
                    const RunConfig& config);

/// run_nem with noise disabled.
TrialRecord run_em(const Dataset& data, const GmmParams& init_params, const RunConfig& config);

}  // namespace nem
