#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nem/bench.hpp"

using namespace nem;

namespace {

std::pair<double, double> mean_and_variance(const Dataset& d) {
  const auto& s = d.samples();
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : s) ss += (x - mean) * (x - mean);
  return {mean, ss / (n - 1.0)};
}

SweepConfig small_sweep(InjectionMode mode, NoisePolicy policy, std::vector<double> grid, std::size_t trials) {
  SweepConfig c;
  c.model = two_gaussian_benchmark_model();
  c.sample_size = 200;
  c.trials_per_point = trials;
  c.sigma_grid = std::move(grid);
  c.noise = NoiseSpec{mode, policy, 0.0, 2.0};
  c.base_seed = 11;
  c.threads = 4;
  return c;
}

}  // namespace

TEST_CASE("generate_data moments") {
  const auto [m1, v1] = mean_and_variance(generate_data(GmmParams{{1.0}, {0.0}, {1.0}}, 100000, 1));
  CHECK(std::abs(m1) < 0.02);
  CHECK(std::abs(v1 - 1.0) < 0.05);

  // 0.5 N(-2,4) + 0.5 N(2,4): variance 4 + 4 = 8. Tolerances are 3 standard errors.
  const auto [m2, v2] = mean_and_variance(generate_data(two_gaussian_benchmark_model(), 100000, 2));
  CHECK(std::abs(m2) < 3.0 * std::sqrt(8.0 / 1e5));
  CHECK(std::abs(v2 - 8.0) < 3.0 * std::sqrt(112.0 / 1e5));

  const Dataset one_sided = generate_data(GmmParams{{1.0, 0.0}, {-50.0, 50.0}, {1.0, 1.0}}, 5000, 3);
  for (double y : one_sided.samples()) CHECK(y < 0.0);

  const auto first = generate_data(two_gaussian_benchmark_model(), 50, 7);
  const auto second = generate_data(two_gaussian_benchmark_model(), 50, 7);
  CHECK(std::ranges::equal(first.samples(), second.samples()));
  CHECK_THROWS_AS(generate_data(two_gaussian_benchmark_model(), 0, 7), std::invalid_argument);
}

TEST_CASE("default grids") {
  const auto add = default_additive_grid();
  const auto mul = default_multiplicative_grid();
  REQUIRE(add.size() == 22);
  REQUIRE(mul.size() == 22);
  CHECK(add.front() == 0.0);
  CHECK(add[19] == doctest::Approx(1.9));
  CHECK(add.back() == doctest::Approx(2.1));
  CHECK(mul.back() == doctest::Approx(1.05));
}

TEST_CASE("sweep config validation") {
  auto c = small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.5}, 10);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.sigma_grid = {0.0, 0.5};
  c.trials_per_point = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.trials_per_point = 2;
  CHECK_NOTHROW(c.validate());
  c.sigma_grid = {0.0, -0.1};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("baseline-only sweep") {
  const auto s = run_sweep(small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.0}, 20));
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].speedup_percent == 0.0);
  CHECK(s.best_sigma() == 0.0);
  CHECK(s.trials.size() == 20);
}

TEST_CASE("sweep determinism and thread independence") {
  auto c = small_sweep(InjectionMode::Multiplicative, NoisePolicy::NemConstrained, {0.0, 0.2, 0.44}, 30);
  const auto a = run_sweep(c);
  c.threads = 1;
  const auto b = run_sweep(c);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i] == b.trials[i]);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean_iterations == b.rows[i].mean_iterations);
    CHECK(a.rows[i].converged_iterations == b.rows[i].converged_iterations);
  }
  CHECK(a.best_index == b.best_index);
}

TEST_CASE("sweep rows") {
  const auto c = small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.0, 1.0, 1.9}, 40);
  const auto nem = run_sweep(c);
  auto off_config = c;
  off_config.noise.policy = NoisePolicy::Off;
  const auto off = run_sweep(off_config);

  // Zero noise in a NEM sweep is the plain-EM row.
  CHECK(nem.rows[0].converged_iterations == off.rows[0].converged_iterations);
  CHECK(nem.rows[0].mean_iterations == off.rows[0].mean_iterations);
  CHECK(nem.rows[0].std_error == off.rows[0].std_error);
  for (std::size_t t = 0; t < c.trials_per_point; ++t) CHECK(nem.trials[t] == off.trials[t]);
  // Every row of an Off sweep repeats the baseline because data is shared across the grid.
  for (const auto& row : off.rows) CHECK(row.converged_iterations == off.rows[0].converged_iterations);

  for (const auto& row : nem.rows) {
    CHECK(row.trials == 40);
    CHECK(row.convergence_rate >= 0.0);
    CHECK(row.convergence_rate <= 1.0);
    CHECK(row.converged == row.converged_iterations.size());
    CHECK(row.convergence_rate == doctest::Approx(static_cast<double>(row.converged) / 40.0));
    REQUIRE(row.mean_iterations);
    const double sum = std::accumulate(row.converged_iterations.begin(), row.converged_iterations.end(), 0.0);
    CHECK(*row.mean_iterations == doctest::Approx(sum / static_cast<double>(row.converged)));
    CHECK(*row.speedup_percent ==
          doctest::Approx(100.0 * (*nem.rows[0].mean_iterations - *row.mean_iterations) / *nem.rows[0].mean_iterations));
  }
}

TEST_CASE("rows without converged trials are flagged") {
  auto c = small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.0, 1.0}, 5);
  c.run.max_iterations = 2;
  c.run.tol_exponent = 12;
  const auto s = run_sweep(c);
  for (const auto& row : s.rows) {
    CHECK_FALSE(row.mean_iterations);
    CHECK(row.convergence_rate == 0.0);
  }
  CHECK(s.rows[0].speedup_percent == 0.0);
  CHECK_FALSE(s.rows[1].speedup_percent);
  CHECK_FALSE(s.best_index);
}

TEST_CASE("bootstrap basics") {
  const std::vector<int> a{12, 9, 15, 11, 10, 13, 8, 14};
  const auto same = bootstrap_diff(a, a, 2000, 0.95, 1);
  CHECK(same.point_estimate == 0.0);
  CHECK(same.ci_low <= 0.0);
  CHECK(same.ci_high >= 0.0);
  CHECK(same.p_value > 0.5);

  const std::vector<int> tens{10, 10, 10}, sevens{7, 7, 7};
  const auto constant = bootstrap_diff(tens, sevens, 1000, 0.95, 1);
  CHECK(constant.point_estimate == 3.0);
  CHECK(constant.ci_low == 3.0);
  CHECK(constant.ci_high == 3.0);
  CHECK(constant.num_resamples == 1000);

  const std::vector<int> b{7, 9, 8, 6, 10, 7, 9};
  const auto ab = bootstrap_diff(a, b, 5000, 0.95, 42);
  const auto ba = bootstrap_diff(b, a, 5000, 0.95, 42);
  CHECK(ab.p_value == ba.p_value);
  CHECK(ab.point_estimate == doctest::Approx(-ba.point_estimate));
  CHECK(ab.ci_low == doctest::Approx(-ba.ci_high));
  CHECK(ab.ci_high == doctest::Approx(-ba.ci_low));
  CHECK(ab.ci_low <= ab.point_estimate);
  CHECK(ab.point_estimate <= ab.ci_high);
  CHECK(ab.p_value >= 0.0);
  CHECK(ab.p_value <= 1.0);
  CHECK(ab.p_value < 0.05);
  CHECK(bootstrap_diff(a, b, 5000, 0.95, 42) == ab);
  CHECK_FALSE(bootstrap_diff(a, b, 5000, 0.95, 43) == ab);

  const std::vector<int> empty;
  CHECK_THROWS_AS(bootstrap_diff(empty, b, 100, 0.95, 1), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_diff(a, b, 100, 1.0, 1), std::invalid_argument);
}

TEST_CASE("bootstrap interval covers a known difference") {
  // Two normal samples with mean difference 0.5; a 95% interval should cover
  // it in roughly 95% of repetitions. 100 repetitions, lower bound 88%.
  int covered = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const Dataset x = generate_data(GmmParams{{1.0}, {0.5}, {1.0}}, 200, 1000 + r);
    const Dataset y = generate_data(GmmParams{{1.0}, {0.0}, {1.0}}, 200, 5000 + r);
    const auto res = bootstrap_diff(x.samples(), y.samples(), 1000, 0.95, r);
    if (res.ci_low <= 0.5 && 0.5 <= res.ci_high) ++covered;
  }
  CHECK(covered >= 88);
}

TEST_CASE("compare_modes") {
  const auto c = small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.0, 1.0, 1.9}, 30);
  const auto same = compare_modes(c, c, 1000, 0.95, 3);
  CHECK(same.bootstrap.point_estimate == 0.0);
  CHECK(same.sigma_star_a == same.sigma_star_b);

  auto other = c;
  other.sample_size = 100;
  CHECK_THROWS_AS(compare_modes(c, other, 100, 0.95, 3), std::invalid_argument);
}

TEST_CASE("constrained noise beats blind noise at the same intensity") {
  const auto nem = run_sweep(small_sweep(InjectionMode::Additive, NoisePolicy::NemConstrained, {0.0, 1.9}, 100));
  const auto blind = run_sweep(small_sweep(InjectionMode::Additive, NoisePolicy::Blind, {0.0, 1.9}, 100));
  const auto res = bootstrap_diff(nem.rows[1].converged_iterations, blind.rows[1].converged_iterations, 5000, 0.95, 9);
  CHECK(res.point_estimate < 0.0);
  CHECK(res.ci_high < 0.0);
}
