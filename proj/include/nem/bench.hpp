#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nem/mixture.hpp"
#include "nem/noise.hpp"
#include "nem/runner.hpp"

namespace nem {

/// One noise-intensity sweep: for every sigma on the grid, run independent
/// trials on freshly generated data and record convergence statistics.
struct SweepConfig {
  GmmParams model;
  std::size_t sample_size = 200;
  std::size_t trials_per_point = 500;
  std::vector<double> sigma_grid;
  /// Mode, policy and tau; sigma_n is taken from the grid.
  NoiseSpec noise;
  RunConfig run;
  std::uint64_t base_seed = 0;
  /// Reuse one dataset for every trial instead of drawing fresh data.
  bool fixed_dataset = false;
  /// Worker threads; 0 selects hardware concurrency. Never changes results.
  unsigned threads = 0;

  void validate() const;
};

/// Default additive grid 0, 0.1, ..., 2.1.
std::vector<double> default_additive_grid();
/// Default multiplicative grid 0, 0.05, ..., 1.05.
std::vector<double> default_multiplicative_grid();

/// The two-component model 0.5 N(-2, 4) + 0.5 N(2, 4).
GmmParams two_gaussian_benchmark_model();

struct SweepRow {
  double sigma_n = 0.0;
  /// Mean over converged trials; empty when no trial converged.
  std::optional<double> mean_iterations;
  double std_error = 0.0;
  double convergence_rate = 0.0;
  std::optional<double> speedup_percent;
  /// Mean infinity-norm distance of the final estimate to the model,
  /// after matching component labels by sorted means.
  double mean_distance_to_truth = 0.0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  /// Iteration counts of the converged trials, in trial order.
  std::vector<int> converged_iterations;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  /// Index of the row with the smallest mean iteration count.
  std::optional<std::size_t> best_index;
  /// Every trial record, ordered by (grid index, trial index).
  std::vector<TrialRecord> trials;

  std::optional<double> best_sigma() const;
  const SweepRow& baseline() const;
};

struct BootstrapResult {
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  double p_value = 1.0;
  std::size_t num_resamples = 0;

  bool operator==(const BootstrapResult&) const = default;
};

struct ModeComparison {
  SweepSummary summary_a;
  SweepSummary summary_b;
  double sigma_star_a = 0.0;
  double sigma_star_b = 0.0;
  /// Bootstrap of mean(iterations at sigma*_a) - mean(iterations at sigma*_b).
  BootstrapResult bootstrap;
};

/// M draws from the mixture: component j with probability alpha_j, then N(mu_j, var_j).
Dataset generate_data(const GmmParams& model, std::size_t m, std::uint64_t seed);

/// Seed of the dataset used by trial `trial` of a sweep.
std::uint64_t trial_data_seed(std::uint64_t base_seed, std::size_t trial);
/// Seed of the noise stream of trial `trial` at grid point `grid`.
std::uint64_t trial_run_seed(std::uint64_t base_seed, std::size_t grid, std::size_t trial);

SweepSummary run_sweep(const SweepConfig& config);

/// Percentile bootstrap for mean(a) - mean(b) with a shifted-null two-sided
/// achieved significance level.
BootstrapResult bootstrap_diff(std::span<const int> a, std::span<const int> b,
                               std::size_t num_resamples, double level, std::uint64_t seed);
BootstrapResult bootstrap_diff(std::span<const double> a, std::span<const double> b,
                               std::size_t num_resamples, double level, std::uint64_t seed);

/// Runs both sweeps, picks each empirical sigma*, and bootstraps the
/// difference of mean iteration counts at the two optima.
ModeComparison compare_modes(const SweepConfig& config_a, const SweepConfig& config_b,
                             std::size_t num_resamples = 10000, double level = 0.95,
                             std::uint64_t bootstrap_seed = 0);

}  // namespace nem
