#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nem {

/// Lower bound applied to every component variance (data units squared).
inline constexpr double kVarianceFloor = 1e-6;

/// Total responsibility below which a component is treated as empty.
inline constexpr double kDegenerateMass = 1e-12;

/// Parameters of a one-dimensional K-component Gaussian mixture.
struct GmmParams {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t size() const noexcept { return weights.size(); }

  /// Throws std::invalid_argument when the mixture invariants do not hold:
  /// matching lengths, K >= 1, convex weights, variances >= the floor.
  void validate() const;

  bool operator==(const GmmParams&) const = default;
};

/// Observed samples y_1..y_M. Construction rejects empty or non-finite input.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<double> samples);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
};

/// Row-major M x K matrix of posterior membership probabilities.
class ResponsibilityMatrix {
 public:
  ResponsibilityMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }

  /// Sum of column j, the effective number of samples owned by component j.
  double column_mass(std::size_t j) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// Result of an M-step. `degenerate[j]` is set when component j received
/// almost no responsibility and kept its previous parameters.
struct MStepResult {
  GmmParams params;
  std::vector<bool> degenerate;

  bool any_degenerate() const;
};

/// ln N(y; mean, variance). Throws std::domain_error for variance <= 0.
double component_log_pdf(double y, double mean, double variance);

/// Log of the mixture density at a single point, via log-sum-exp.
double mixture_log_pdf(double y, const GmmParams& params);

/// Sum over samples of ln sum_j alpha_j f(y_i | mu_j, var_j).
double mixture_log_likelihood(const Dataset& data, const GmmParams& params);

/// Posterior component probabilities for every sample, computed in log space.
ResponsibilityMatrix e_step(const Dataset& data, const GmmParams& params);

/// Closed-form maximizer of the mixture Q-function for the given
/// responsibilities, evaluated on (possibly noise-perturbed) data.
/// Components with total responsibility below kDegenerateMass keep the
/// matching entries of `previous`.
MStepResult m_step(const Dataset& noisy_data, const ResponsibilityMatrix& resp,
                   const GmmParams& previous);

/// Overload for callers without previous parameters: degenerate components
/// fall back to weight 0, the global weighted mean, and the sample variance.
MStepResult m_step(const Dataset& noisy_data, const ResponsibilityMatrix& resp);

/// Q(candidate | .) = sum_i sum_j r_ij (ln alpha_j + ln f(y_i | j)).
/// Returns -infinity when a zero weight carries nonzero responsibility.
double compute_q(const GmmParams& candidate, const ResponsibilityMatrix& resp,
                 const Dataset& noisy_data);

/// Concatenation (weights, means, variances) used by the stopping rule.
std::vector<double> flatten(const GmmParams& params);

/// Infinity-norm distance between two parameter vectors of equal K.
double max_abs_diff(const GmmParams& a, const GmmParams& b);

}  // namespace nem
