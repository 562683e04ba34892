#include "nem/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace nem {

namespace {

constexpr std::uint64_t kCiStream = 11;
constexpr std::uint64_t kNullStream = 12;

std::vector<double> grid(double step, std::size_t count) {
  std::vector<double> g(count);
  // Multiply rather than accumulate so grid values print cleanly.
  for (std::size_t i = 0; i < count; ++i) g[i] = std::round(static_cast<double>(i) * step * 1e9) / 1e9;
  return g;
}

GmmParams sorted_by_mean(const GmmParams& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p.means[a] < p.means[b]; });
  GmmParams out;
  for (auto j : order) {
    out.weights.push_back(p.weights[j]);
    out.means.push_back(p.means[j]);
    out.variances.push_back(p.variances[j]);
  }
  return out;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Type-7 quantile of sorted values.
double quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double resampled_mean(std::span<const double> v, Rng& rng) {
  const std::size_t n = v.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pick = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
    acc += v[pick];
  }
  return acc / static_cast<double>(n);
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

}  // namespace

void SweepConfig::validate() const {
  model.validate();
  noise.validate();
  run.validate();
  if (sample_size < 1) throw std::invalid_argument("SweepConfig: sample_size must be >= 1");
  if (trials_per_point < 2) throw std::invalid_argument("SweepConfig: trials_per_point must be >= 2");
  if (sigma_grid.empty()) throw std::invalid_argument("SweepConfig: sigma_grid is empty");
  if (std::find(sigma_grid.begin(), sigma_grid.end(), 0.0) == sigma_grid.end())
    throw std::invalid_argument("SweepConfig: sigma_grid must contain 0");
  for (double s : sigma_grid)
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("SweepConfig: negative sigma in grid");
}

std::vector<double> default_additive_grid() { return grid(0.1, 22); }
std::vector<double> default_multiplicative_grid() { return grid(0.05, 22); }

GmmParams two_gaussian_benchmark_model() { return GmmParams{{0.5, 0.5}, {-2.0, 2.0}, {4.0, 4.0}}; }

std::optional<double> SweepSummary::best_sigma() const {
  if (!best_index) return std::nullopt;
  return rows[*best_index].sigma_n;
}

const SweepRow& SweepSummary::baseline() const {
  for (const auto& row : rows)
    if (row.sigma_n == 0.0) return row;
  throw std::logic_error("SweepSummary: no sigma = 0 row");
}

Dataset generate_data(const GmmParams& model, std::size_t m, std::uint64_t seed) {
  model.validate();
  if (m < 1) throw std::invalid_argument("generate_data: M must be >= 1");
  Rng rng(seed);
  std::vector<double> cumulative(model.size());
  std::partial_sum(model.weights.begin(), model.weights.end(), cumulative.begin());
  std::vector<double> samples(m);
  for (auto& y : samples) {
    const double u = uniform01(rng) * cumulative.back();
    std::size_t j = 0;
    // Zero-weight components have an empty slot, so u < cumulative[j] skips them.
    while (j + 1 < model.size() && !(u < cumulative[j])) ++j;
    y = model.means[j] + std::sqrt(model.variances[j]) * standard_normal(rng);
  }
  return Dataset(std::move(samples));
}

std::uint64_t trial_data_seed(std::uint64_t base_seed, std::size_t trial) {
  return derive_seed(base_seed, 2 * static_cast<std::uint64_t>(trial));
}

std::uint64_t trial_run_seed(std::uint64_t base_seed, std::size_t grid, std::size_t trial) {
  return derive_seed(derive_seed(base_seed, 2 * static_cast<std::uint64_t>(trial) + 1), grid);
}

SweepSummary run_sweep(const SweepConfig& config) {
  config.validate();
  const std::size_t points = config.sigma_grid.size();
  const std::size_t trials = config.trials_per_point;
  const std::size_t k = config.model.size();

  SweepSummary summary;
  summary.trials.resize(points * trials);
  std::vector<double> distances(points * trials, 0.0);
  const GmmParams truth = sorted_by_mean(config.model);

  parallel_for(points * trials, config.threads, [&](std::size_t job) {
    const std::size_t g = job / trials;
    const std::size_t t = job % trials;
    const Dataset data = generate_data(
        config.model, config.sample_size,
        trial_data_seed(config.base_seed, config.fixed_dataset ? 0 : t));
    RunConfig run = config.run;
    run.seed = trial_run_seed(config.base_seed, g, t);
    NoiseSpec noise = config.noise;
    noise.sigma_n = config.sigma_grid[g];
    const GmmParams init = initial_params(data, k, run.init, run.seed);
    summary.trials[job] = run_nem(data, init, noise, run);
    if (k == truth.size()) distances[job] = max_abs_diff(sorted_by_mean(summary.trials[job].final_params), truth);
  });

  std::optional<double> baseline_mean;
  summary.rows.resize(points);
  for (std::size_t g = 0; g < points; ++g) {
    SweepRow& row = summary.rows[g];
    row.sigma_n = config.sigma_grid[g];
    row.trials = trials;
    double distance = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialRecord& rec = summary.trials[g * trials + t];
      distance += distances[g * trials + t];
      if (rec.converged) row.converged_iterations.push_back(rec.iterations);
    }
    row.converged = row.converged_iterations.size();
    row.convergence_rate = static_cast<double>(row.converged) / static_cast<double>(trials);
    row.mean_distance_to_truth = distance / static_cast<double>(trials);
    if (row.converged > 0) {
      const auto& its = row.converged_iterations;
      const double mean = std::accumulate(its.begin(), its.end(), 0.0) / static_cast<double>(its.size());
      double ss = 0.0;
      for (int it : its) ss += (it - mean) * (it - mean);
      row.mean_iterations = mean;
      row.std_error = its.size() > 1
                          ? std::sqrt(ss / static_cast<double>(its.size() - 1) / static_cast<double>(its.size()))
                          : 0.0;
    }
    if (row.sigma_n == 0.0 && !baseline_mean) baseline_mean = row.mean_iterations;
  }

  for (std::size_t g = 0; g < points; ++g) {
    SweepRow& row = summary.rows[g];
    if (row.sigma_n == 0.0) {
      row.speedup_percent = 0.0;
    } else if (row.mean_iterations && baseline_mean && *baseline_mean > 0.0) {
      row.speedup_percent = 100.0 * (*baseline_mean - *row.mean_iterations) / *baseline_mean;
    }
    if (row.mean_iterations &&
        (!summary.best_index || *row.mean_iterations < *summary.rows[*summary.best_index].mean_iterations))
      summary.best_index = g;
  }
  return summary;
}

BootstrapResult bootstrap_diff(std::span<const double> a, std::span<const double> b,
                               std::size_t num_resamples, double level, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap_diff: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_diff: level must be in (0, 1)");
  if (num_resamples < 1) throw std::invalid_argument("bootstrap_diff: need at least one resample");

  // Resample in a canonical argument order so that swapping a and b only
  // mirrors the result.
  const bool swapped = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  const auto first = swapped ? b : a;
  const auto second = swapped ? a : b;

  const double mean_first = mean_of(first);
  const double mean_second = mean_of(second);
  const double observed = mean_first - mean_second;

  std::vector<double> shifted_first(first.begin(), first.end());
  std::vector<double> shifted_second(second.begin(), second.end());
  const double pooled = (mean_first * static_cast<double>(first.size()) +
                         mean_second * static_cast<double>(second.size())) /
                        static_cast<double>(first.size() + second.size());
  for (double& v : shifted_first) v += pooled - mean_first;
  for (double& v : shifted_second) v += pooled - mean_second;

  Rng ci_rng(derive_seed(seed, kCiStream));
  Rng null_rng(derive_seed(seed, kNullStream));
  std::vector<double> diffs(num_resamples);
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < num_resamples; ++r) {
    const double d1 = resampled_mean(first, ci_rng);
    diffs[r] = d1 - resampled_mean(second, ci_rng);
    const double n1 = resampled_mean(shifted_first, null_rng);
    const double null_diff = n1 - resampled_mean(shifted_second, null_rng);
    if (std::abs(null_diff) >= std::abs(observed)) ++extreme;
  }
  std::sort(diffs.begin(), diffs.end());

  BootstrapResult out;
  out.level = level;
  out.num_resamples = num_resamples;
  out.p_value = static_cast<double>(extreme) / static_cast<double>(num_resamples);
  const double lo = quantile(diffs, 0.5 * (1.0 - level));
  const double hi = quantile(diffs, 0.5 * (1.0 + level));
  if (swapped) {
    out.point_estimate = -observed;
    out.ci_low = -hi;
    out.ci_high = -lo;
  } else {
    out.point_estimate = observed;
    out.ci_low = lo;
    out.ci_high = hi;
  }
  // Tiny or heavily skewed samples can put the percentile interval beside
  // the point estimate; widen to keep it bracketed.
  out.ci_low = std::min(out.ci_low, out.point_estimate);
  out.ci_high = std::max(out.ci_high, out.point_estimate);
  return out;
}

BootstrapResult bootstrap_diff(std::span<const int> a, std::span<const int> b,
                               std::size_t num_resamples, double level, std::uint64_t seed) {
  const std::vector<double> da(a.begin(), a.end());
  const std::vector<double> db(b.begin(), b.end());
  return bootstrap_diff(std::span<const double>(da), std::span<const double>(db), num_resamples,
                        level, seed);
}

ModeComparison compare_modes(const SweepConfig& config_a, const SweepConfig& config_b,
                             std::size_t num_resamples, double level, std::uint64_t bootstrap_seed) {
  if (!(config_a.model == config_b.model) || config_a.sample_size != config_b.sample_size ||
      !(config_a.run == config_b.run))
    throw std::invalid_argument("compare_modes: configurations must share model, sample size and run config");

  ModeComparison out;
  out.summary_a = run_sweep(config_a);
  out.summary_b = run_sweep(config_b);
  if (!out.summary_a.best_index || !out.summary_b.best_index)
    throw std::runtime_error("compare_modes: a sweep produced no converged trials");
  const SweepRow& best_a = out.summary_a.rows[*out.summary_a.best_index];
  const SweepRow& best_b = out.summary_b.rows[*out.summary_b.best_index];
  out.sigma_star_a = best_a.sigma_n;
  out.sigma_star_b = best_b.sigma_n;
  out.bootstrap = bootstrap_diff(std::span<const int>(best_a.converged_iterations),
                                 std::span<const int>(best_b.converged_iterations), num_resamples,
                                 level, bootstrap_seed);
  return out;
}

}  // namespace nem
