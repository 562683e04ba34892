#include "nem/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nem {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // ln(2*pi)

double log_sum_exp(std::span<const double> terms) {
  const double peak = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

}  // namespace

void GmmParams::validate() const {
  const std::size_t k = weights.size();
  if (k == 0) throw std::invalid_argument("GmmParams: at least one component required");
  if (means.size() != k || variances.size() != k)
    throw std::invalid_argument("GmmParams: weights, means and variances differ in length");
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!std::isfinite(weights[j]) || weights[j] < 0.0)
      throw std::invalid_argument("GmmParams: weight " + std::to_string(j) + " is negative or non-finite");
    if (!std::isfinite(means[j]))
      throw std::invalid_argument("GmmParams: mean " + std::to_string(j) + " is non-finite");
    if (!std::isfinite(variances[j]) || variances[j] < kVarianceFloor)
      throw std::invalid_argument("GmmParams: variance " + std::to_string(j) + " is below the floor");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GmmParams: weights do not sum to 1");
}

Dataset::Dataset(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw std::domain_error("Dataset: no samples");
  for (double y : samples_)
    if (!std::isfinite(y)) throw std::domain_error("Dataset: non-finite sample");
}

ResponsibilityMatrix::ResponsibilityMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

double ResponsibilityMatrix::column_mass(std::size_t j) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) mass += (*this)(i, j);
  return mass;
}

bool MStepResult::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool d) { return d; });
}

double component_log_pdf(double y, double mean, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("component_log_pdf: variance must be positive");
  const double d = y - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

double mixture_log_pdf(double y, const GmmParams& params) {
  std::vector<double> terms(params.size());
  for (std::size_t j = 0; j < params.size(); ++j)
    terms[j] = std::log(params.weights[j]) + component_log_pdf(y, params.means[j], params.variances[j]);
  return log_sum_exp(terms);
}

double mixture_log_likelihood(const Dataset& data, const GmmParams& params) {
  if (data.size() == 0) throw std::domain_error("mixture_log_likelihood: empty dataset");
  double total = 0.0;
  for (double y : data.samples()) total += mixture_log_pdf(y, params);
  return total;
}

ResponsibilityMatrix e_step(const Dataset& data, const GmmParams& params) {
  const std::size_t k = params.size();
  ResponsibilityMatrix resp(data.size(), k);
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j)
      terms[j] = std::log(params.weights[j]) +
                 component_log_pdf(data[i], params.means[j], params.variances[j]);
    const double norm = log_sum_exp(terms);
    for (std::size_t j = 0; j < k; ++j) resp(i, j) = std::exp(terms[j] - norm);
  }
  return resp;
}

MStepResult m_step(const Dataset& noisy_data, const ResponsibilityMatrix& resp,
                   const GmmParams& previous) {
  const std::size_t m = noisy_data.size();
  const std::size_t k = resp.cols();
  if (resp.rows() != m) throw std::invalid_argument("m_step: responsibility rows do not match data");
  if (previous.size() != k) throw std::invalid_argument("m_step: previous parameters have wrong K");

  MStepResult out;
  out.params.weights.resize(k);
  out.params.means.resize(k);
  out.params.variances.resize(k);
  out.degenerate.assign(k, false);

  for (std::size_t j = 0; j < k; ++j) {
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mass += resp(i, j);
      first += resp(i, j) * noisy_data[i];
    }
    if (mass < kDegenerateMass) {
      out.degenerate[j] = true;
      out.params.weights[j] = previous.weights[j];
      out.params.means[j] = previous.means[j];
      out.params.variances[j] = previous.variances[j];
      continue;
    }
    const double mean = first / mass;
    double second = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = noisy_data[i] - mean;
      second += resp(i, j) * d * d;
    }
    out.params.weights[j] = mass / static_cast<double>(m);
    out.params.means[j] = mean;
    out.params.variances[j] = std::max(kVarianceFloor, second / mass);
  }

  // Kept weights of degenerate components break convexity; renormalize.
  if (out.any_degenerate()) {
    double total = 0.0;
    for (double w : out.params.weights) total += w;
    for (double& w : out.params.weights) w /= total;
  }
  return out;
}

MStepResult m_step(const Dataset& noisy_data, const ResponsibilityMatrix& resp) {
  const std::size_t m = noisy_data.size();
  double mean = 0.0;
  for (double y : noisy_data.samples()) mean += y;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double y : noisy_data.samples()) var += (y - mean) * (y - mean);
  var = std::max(kVarianceFloor, var / static_cast<double>(m));

  GmmParams fallback;
  fallback.weights.assign(resp.cols(), 0.0);
  fallback.means.assign(resp.cols(), mean);
  fallback.variances.assign(resp.cols(), var);
  return m_step(noisy_data, resp, fallback);
}

double compute_q(const GmmParams& candidate, const ResponsibilityMatrix& resp,
                 const Dataset& noisy_data) {
  if (resp.rows() != noisy_data.size() || resp.cols() != candidate.size())
    throw std::invalid_argument("compute_q: dimension mismatch");
  double q = 0.0;
  for (std::size_t j = 0; j < candidate.size(); ++j) {
    const double log_w = std::log(candidate.weights[j]);
    for (std::size_t i = 0; i < noisy_data.size(); ++i) {
      const double r = resp(i, j);
      if (r == 0.0) continue;
      if (candidate.weights[j] == 0.0) return -std::numeric_limits<double>::infinity();
      q += r * (log_w + component_log_pdf(noisy_data[i], candidate.means[j], candidate.variances[j]));
    }
  }
  return q;
}

std::vector<double> flatten(const GmmParams& params) {
  std::vector<double> v;
  v.reserve(3 * params.size());
  v.insert(v.end(), params.weights.begin(), params.weights.end());
  v.insert(v.end(), params.means.begin(), params.means.end());
  v.insert(v.end(), params.variances.begin(), params.variances.end());
  return v;
}

double max_abs_diff(const GmmParams& a, const GmmParams& b) {
  const auto va = flatten(a);
  const auto vb = flatten(b);
  if (va.size() != vb.size()) throw std::invalid_argument("max_abs_diff: K mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = std::abs(va[i] - vb[i]);
    if (std::isnan(d)) return d;
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace nem
