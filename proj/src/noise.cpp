#include "nem/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

namespace nem {

namespace {

// Lower-tail and upper-tail standard normal probabilities, both accurate in
// their own tail.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_sf_inverse(double u) {
  if (u <= 0.0) return std::numeric_limits<double>::infinity();
  if (u >= 1.0) return -std::numeric_limits<double>::infinity();
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

// Inverse-CDF draw from the standard normal restricted to [a, b].
double standard_truncated_inverse_cdf(double a, double b, Rng& rng) {
  if (b <= 0.0) return -standard_truncated_inverse_cdf(-b, -a, rng);
  // Upper-tail parameterization keeps precision for a > 0; for a <= 0 the
  // survival values straddle 0.5 and lose nothing either.
  const double qa = normal_sf(a);
  const double qb = normal_sf(b);
  const double u = qb + (qa - qb) * uniform01(rng);
  return std::clamp(normal_sf_inverse(u), a, b);
}

}  // namespace

std::string_view to_string(InjectionMode mode) {
  return mode == InjectionMode::Additive ? "additive" : "multiplicative";
}

std::string_view to_string(NoisePolicy policy) {
  switch (policy) {
    case NoisePolicy::NemConstrained: return "nem";
    case NoisePolicy::Blind: return "blind";
    case NoisePolicy::Off: return "off";
  }
  return "off";
}

InjectionMode parse_injection_mode(std::string_view text) {
  if (text == "additive" || text == "add") return InjectionMode::Additive;
  if (text == "multiplicative" || text == "mul") return InjectionMode::Multiplicative;
  throw std::invalid_argument("unknown injection mode '" + std::string(text) + "'");
}

NoisePolicy parse_noise_policy(std::string_view text) {
  if (text == "nem" || text == "constrained") return NoisePolicy::NemConstrained;
  if (text == "blind") return NoisePolicy::Blind;
  if (text == "off" || text == "none") return NoisePolicy::Off;
  throw std::invalid_argument("unknown noise policy '" + std::string(text) + "'");
}

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma_n) || sigma_n < 0.0)
    throw std::invalid_argument("NoiseSpec: sigma_n must be finite and >= 0");
  if (!std::isfinite(tau) || tau < 0.0)
    throw std::invalid_argument("NoiseSpec: tau must be finite and >= 0");
}

NoiseSpec NoiseSpec::effective() const {
  if (!inert()) return *this;
  return NoiseSpec{mode, NoisePolicy::Off, 0.0, tau};
}

bool additive_condition(double n, double y, std::span<const double> means) {
  for (double mu : means)
    if (n * n > 2.0 * n * (mu - y) + kConditionTolerance) return false;
  return true;
}

bool multiplicative_condition(double n, double y, std::span<const double> means) {
  for (double mu : means)
    if (y * (n - 1.0) * (y * (n + 1.0) - 2.0 * mu) > kConditionTolerance) return false;
  return true;
}

bool nem_condition(InjectionMode mode, double n, double y, std::span<const double> means) {
  return mode == InjectionMode::Additive ? additive_condition(n, y, means)
                                         : multiplicative_condition(n, y, means);
}

NoiseInterval valid_interval(double y, std::span<const double> means, InjectionMode mode,
                             double scale) {
  if (means.empty()) throw std::invalid_argument("valid_interval: no component means");
  const auto [lo_it, hi_it] = std::minmax_element(means.begin(), means.end());
  const double mu_min = *lo_it;
  const double mu_max = *hi_it;

  if (mode == InjectionMode::Additive) {
    if (y < mu_min) return {0.0, 2.0 * (mu_min - y)};
    if (y > mu_max) return {2.0 * (mu_max - y), 0.0};
    return {0.0, 0.0};
  }

  if (y == 0.0) return {1.0 - kBlindRangeWidth * scale, 1.0 + kBlindRangeWidth * scale};

  // Each component admits the closed segment between 1 and 2 mu_j / y - 1.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (double mu : means) {
    const double root = 2.0 * mu / y - 1.0;
    lo = std::max(lo, std::min(1.0, root));
    hi = std::min(hi, std::max(1.0, root));
  }
  if (lo > hi) return {1.0, 1.0};
  return {lo, hi};
}

double decay_scale(int k, double sigma_n, double tau) {
  if (k < 1) throw std::invalid_argument("decay_scale: iteration index must be >= 1");
  if (tau == 0.0 || k == 1) return sigma_n;
  return sigma_n * std::pow(static_cast<double>(k), -tau);
}

double inject(double y, double n, InjectionMode mode) {
  return mode == InjectionMode::Additive ? y + n : y * n;
}

double truncated_normal(double center, double scale, NoiseInterval bounds, Rng& rng) {
  if (bounds.lo > bounds.hi) throw std::invalid_argument("truncated_normal: empty interval");
  if (bounds.degenerate() || scale == 0.0) return std::clamp(center, bounds.lo, bounds.hi);

  const double a = (bounds.lo - center) / scale;
  const double b = (bounds.hi - center) / scale;
  const double mass = (b <= 0.0) ? normal_cdf(b) - normal_cdf(a) : normal_sf(a) - normal_sf(b);

  if (mass >= kRejectionMinAcceptance) {
    for (;;) {
      const double n = center + scale * standard_normal(rng);
      if (bounds.contains(n)) return n;
    }
  }
  const double n = center + scale * standard_truncated_inverse_cdf(a, b, rng);
  return std::clamp(n, bounds.lo, bounds.hi);
}

double sample_noise(double y, std::span<const double> means, const NoiseSpec& spec, int k,
                    Rng& rng) {
  const double identity = identity_noise(spec.mode);
  if (spec.policy == NoisePolicy::Off) return identity;
  const double scale = decay_scale(k, spec.sigma_n, spec.tau);
  if (scale == 0.0) return identity;

  if (spec.policy == NoisePolicy::Blind || (spec.mode == InjectionMode::Multiplicative && y == 0.0))
    return identity + scale * standard_normal(rng);

  const NoiseInterval bounds = valid_interval(y, means, spec.mode, scale);
  double n = truncated_normal(identity, scale, bounds, rng);

  // Endpoint draws can miss the predicate by roundoff when |y| is large.
  // Pull them toward the identity, which always qualifies.
  double shrink = 1e-12;
  while (!nem_condition(spec.mode, n, y, means)) {
    if (shrink >= 1.0) return identity;
    n = identity + (n - identity) * (1.0 - shrink);
    shrink *= 4.0;
  }
  return n;
}

}  // namespace nem
