#pragma once

#include <span>
#include <string_view>

#include "nem/random.hpp"

namespace nem {

/// How a noise realization n is combined with a sample y.
enum class InjectionMode { Additive, Multiplicative };

/// Whether noise is drawn subject to the NEM condition, drawn freely, or off.
enum class NoisePolicy { NemConstrained, Blind, Off };

std::string_view to_string(InjectionMode mode);
std::string_view to_string(NoisePolicy policy);
InjectionMode parse_injection_mode(std::string_view text);
NoisePolicy parse_noise_policy(std::string_view text);

/// Tolerance on the pointwise condition predicates.
inline constexpr double kConditionTolerance = 1e-12;

/// Below this proposal mass, constrained draws switch from rejection to
/// inverse-CDF sampling.
inline constexpr double kRejectionMinAcceptance = 1e-3;

/// Half-width, in units of the current noise scale, of the interval reported
/// for a multiplicative sample at y = 0 where every n qualifies.
inline constexpr double kBlindRangeWidth = 6.0;

struct NoiseSpec {
  InjectionMode mode = InjectionMode::Additive;
  NoisePolicy policy = NoisePolicy::Off;
  double sigma_n = 0.0;
  double tau = 2.0;

  /// Throws std::invalid_argument for negative or non-finite sigma_n / tau.
  void validate() const;

  /// True when the spec can never inject anything but the identity.
  bool inert() const noexcept { return policy == NoisePolicy::Off || sigma_n == 0.0; }

  /// Canonical spec with identical behaviour: inert specs collapse to
  /// {mode, Off, 0, tau} so that equivalent runs serialize identically.
  NoiseSpec effective() const;

  bool operator==(const NoiseSpec&) const = default;
};

/// Closed interval of noise values that satisfy the NEM condition for one sample.
struct NoiseInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double n) const noexcept { return lo <= n && n <= hi; }
  bool degenerate() const noexcept { return lo == hi; }
};

/// Identity element of the mode: 0 for additive, 1 for multiplicative.
constexpr double identity_noise(InjectionMode mode) noexcept {
  return mode == InjectionMode::Additive ? 0.0 : 1.0;
}

/// n^2 <= 2 n (mu_j - y) + tol for every component mean.
bool additive_condition(double n, double y, std::span<const double> means);

/// y (n - 1) [y (n + 1) - 2 mu_j] <= tol for every component mean.
bool multiplicative_condition(double n, double y, std::span<const double> means);

/// Dispatches to the predicate for `mode`.
bool nem_condition(InjectionMode mode, double n, double y, std::span<const double> means);

/// Set of n satisfying the mode's condition for every mean. For a
/// multiplicative sample at y == 0 the whole line qualifies and the
/// interval reported is 1 +/- kBlindRangeWidth * scale.
NoiseInterval valid_interval(double y, std::span<const double> means, InjectionMode mode,
                             double scale = 0.0);

/// k^-tau * sigma_n.
double decay_scale(int k, double sigma_n, double tau);

/// phi(y, n).
double inject(double y, double n, InjectionMode mode);

/// Draw from N(center, scale^2) truncated to [lo, hi]. Uses rejection while
/// the proposal puts at least kRejectionMinAcceptance mass on the interval
/// and an inverse-CDF draw otherwise.
double truncated_normal(double center, double scale, NoiseInterval bounds, Rng& rng);

/// One noise realization for sample y at iteration k (k >= 1). Constrained
/// draws always satisfy nem_condition(spec.mode, n, y, means).
double sample_noise(double y, std::span<const double> means, const NoiseSpec& spec, int k,
                    Rng& rng);

}  // namespace nem
