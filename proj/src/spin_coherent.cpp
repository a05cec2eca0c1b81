#include "qratio/spin_coherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/numeric.hpp"

namespace qratio::spin {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// theta exactly 0 or pi: the state is a J_z eigenstate.
int edge_index(const SpinCoherentState& s) {
  if (s.theta == 0.0) return s.two_j;
  if (s.theta == kPi) return 0;
  return -1;
}

SpinDistribution normalize_log_weights(int two_j, std::vector<double> logw) {
  const double peak = *std::max_element(logw.begin(), logw.end());
  SpinDistribution d;
  d.two_j = two_j;
  d.weights.resize(logw.size());
  for (std::size_t k = 0; k < logw.size(); ++k) d.weights[k] = std::exp(logw[k] - peak);
  const double shifted_sum = pairwise_sum(d.weights);
  d.normalization_defect = std::abs(std::exp(peak) * shifted_sum - 1.0);
  for (double& w : d.weights) w /= shifted_sum;
  return d;
}

SpinDistribution one_hot(int two_j, int k) {
  SpinDistribution d;
  d.two_j = two_j;
  d.weights.assign(static_cast<std::size_t>(two_j) + 1, 0.0);
  d.weights[static_cast<std::size_t>(k)] = 1.0;
  return d;
}

}  // namespace

SpinCoherentState SpinCoherentState::from_j(double j, double theta, double phi) {
  const double two_j = 2.0 * j;
  const double rounded = std::round(two_j);
  if (!(j > 0.0) || std::abs(two_j - rounded) > 1e-9 || rounded > 2.0e9) {
    throw DomainError("spin j must be a positive multiple of 1/2");
  }
  SpinCoherentState s{static_cast<int>(rounded), theta, phi};
  s.validate();
  return s;
}

void SpinCoherentState::validate() const {
  if (two_j < 1) throw DomainError("2j must be a positive integer");
  if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("theta must lie in [0, pi]");
  if (!std::isfinite(phi)) throw DomainError("phi must be finite");
}

int SpinDistribution::argmax() const {
  return static_cast<int>(std::max_element(weights.begin(), weights.end()) - weights.begin());
}

double SpinDistribution::mean_m() const {
  return pairwise_sum_of(weights.size(), [&](std::size_t k) {
    return weights[k] * m(static_cast<int>(k));
  });
}

double SpinDistribution::stddev_m() const {
  const double mu = mean_m();
  const double var = pairwise_sum_of(weights.size(), [&](std::size_t k) {
    const double d = m(static_cast<int>(k)) - mu;
    return weights[k] * d * d;
  });
  return std::sqrt(var);
}

double log_weight(const SpinCoherentState& state, int k) {
  state.validate();
  const int n = state.two_j;
  if (k < 0 || k > n) throw DomainError("k must lie in [0, 2j]");
  if (const int e = edge_index(state); e >= 0) return k == e ? 0.0 : kNegInf;
  const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  const double lc = std::log(std::cos(0.5 * state.theta));
  const double ls = std::log(std::sin(0.5 * state.theta));
  return log_binom + 2.0 * k * lc + 2.0 * (n - k) * ls;
}

std::complex<double> coefficient(const SpinCoherentState& state, int k) {
  const double lw = log_weight(state, k);
  const double magnitude = std::exp(0.5 * lw);
  const double phase = (state.j() - k) * state.phi;
  return std::polar(magnitude, phase);
}

SpinDistribution distribution(const SpinCoherentState& state) {
  state.validate();
  if (const int e = edge_index(state); e >= 0) return one_hot(state.two_j, e);
  std::vector<double> logw(static_cast<std::size_t>(state.two_j) + 1);
  for (int k = 0; k <= state.two_j; ++k) logw[static_cast<std::size_t>(k)] = log_weight(state, k);
  return normalize_log_weights(state.two_j, std::move(logw));
}

SpinDistribution stirling_distribution(const SpinCoherentState& state) {
  state.validate();
  if (const int e = edge_index(state); e >= 0) return one_hot(state.two_j, e);
  const int n = state.two_j;
  const double lc = std::log(std::cos(0.5 * state.theta));
  const double ls = std::log(std::sin(0.5 * state.theta));
  std::vector<double> logw(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) / n;
    // x log x -> 0 at the end points
    const double entropy = (k == 0 || k == n) ? 0.0 : -x * std::log(x) - (1.0 - x) * std::log1p(-x);
    logw[static_cast<std::size_t>(k)] = n * (entropy + 2.0 * x * lc + 2.0 * (1.0 - x) * ls);
  }
  return normalize_log_weights(n, std::move(logw));
}

double stirling_log_weight(double theta, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("stirling_log_weight needs 0 < x < 1");
  if (!(theta > 0.0 && theta < kPi)) throw DomainError("stirling_log_weight needs 0 < theta < pi");
  return -x * std::log(x) - (1.0 - x) * std::log1p(-x) + 2.0 * x * std::log(std::cos(0.5 * theta)) +
         2.0 * (1.0 - x) * std::log(std::sin(0.5 * theta));
}

SaddlePoint saddle_point_peak(double j, double theta) {
  if (!(theta > 0.0 && theta < kPi)) throw DomainError("saddle point needs 0 < theta < pi");
  const double c = std::cos(0.5 * theta);
  return {c * c, j * std::cos(theta)};
}

ClassicalLimitReport classical_limit_diagnostics(double j, double theta) {
  const auto state = SpinCoherentState::from_j(j, theta);
  const auto dist = distribution(state);
  ClassicalLimitReport r;
  r.argmax_m = dist.m(dist.argmax());
  r.deviation = std::abs(r.argmax_m - j * std::cos(theta));
  r.relative_width = dist.stddev_m() / j;
  const double c = std::cos(0.5 * theta);
  const double x0 = c * c;
  r.predicted_width = 2.0 * std::sqrt(x0 * (1.0 - x0)) / std::sqrt(2.0 * j);
  return r;
}

}  // namespace qratio::spin
