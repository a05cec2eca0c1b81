#pragma once

#include <complex>
#include <vector>

namespace qratio::spin {

// Spin-j state with maximal projection along n = (sin t cos p, sin t sin p, cos t).
// j is stored as the integer 2j so that half-integer spins stay exact.
struct SpinCoherentState {
  int two_j = 1;
  double theta = 0.0;
  double phi = 0.0;

  static SpinCoherentState from_j(double j, double theta, double phi = 0.0);
  double j() const { return 0.5 * two_j; }
  void validate() const;
};

// |c_k|^2 for k = 0..2j, m = -j + k.
struct SpinDistribution {
  int two_j = 1;
  std::vector<double> weights;
  // |sum of the unnormalized weights - 1| before renormalization.
  double normalization_defect = 0.0;

  double j() const { return 0.5 * two_j; }
  double m(int k) const { return -0.5 * two_j + k; }
  int argmax() const;
  double mean_m() const;
  double stddev_m() const;
};

// log |c_k|^2 from log-gamma binomials; -inf where c_k vanishes.
double log_weight(const SpinCoherentState& state, int k);

// c_k = C(2j,k)^(1/2) e^{i(j-k)phi} cos^k(theta/2) sin^(2j-k)(theta/2).
std::complex<double> coefficient(const SpinCoherentState& state, int k);

// Exact distribution, max-shifted in log space and renormalized.
SpinDistribution distribution(const SpinCoherentState& state);

// Large-spin approximation |c_k|^2 ~ exp(2j f(k/2j)), normalized over k.
SpinDistribution stirling_distribution(const SpinCoherentState& state);

// f(x) = -x log x - (1-x) log(1-x) + 2x log cos(theta/2) + 2(1-x) log sin(theta/2)
// for 0 < x < 1 and 0 < theta < pi.
double stirling_log_weight(double theta, double x);

struct SaddlePoint {
  double x0;      // cos^2(theta/2)
  double m_peak;  // j cos(theta)
};

SaddlePoint saddle_point_peak(double j, double theta);

struct ClassicalLimitReport {
  double argmax_m = 0.0;
  double deviation = 0.0;        // |argmax_m - j cos(theta)|
  double relative_width = 0.0;   // stddev(m) / j
  double predicted_width = 0.0;  // 2 sqrt(x0 (1 - x0)) / sqrt(2j)
};

ClassicalLimitReport classical_limit_diagnostics(double j, double theta);

}  // namespace qratio::spin
