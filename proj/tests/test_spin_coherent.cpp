#include <cmath>
#include <vector>

#include "doctest.h"
#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/spin_coherent.hpp"

using namespace qratio;
using namespace qratio::spin;

namespace {

// Direct product form, fine for small 2j.
std::vector<double> brute_force(int n, double theta) {
  std::vector<double> w(n + 1);
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  for (int k = 0; k <= n; ++k) {
    double binom = 1.0;
    for (int i = 1; i <= k; ++i) binom = binom * (n - k + i) / i;
    w[k] = binom * std::pow(c, 2 * k) * std::pow(s, 2 * (n - k));
  }
  return w;
}

}  // namespace

TEST_CASE("coefficients for spin one half") {
  const auto up = SpinCoherentState::from_j(0.5, 0.0);
  CHECK(std::abs(coefficient(up, 1)) == 1.0);
  CHECK(std::abs(coefficient(up, 0)) == 0.0);

  const auto eq = SpinCoherentState::from_j(0.5, kPi / 2);
  CHECK(std::norm(coefficient(eq, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::norm(coefficient(eq, 1)) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(coefficient(eq, 2), DomainError);
  CHECK_THROWS_AS(coefficient(eq, -1), DomainError);
}

TEST_CASE("coefficient phase") {
  const auto s = SpinCoherentState::from_j(1.5, 1.0, 0.7);
  for (int k = 0; k <= 3; ++k) {
    CHECK(std::arg(coefficient(s, k)) == doctest::Approx((1.5 - k) * 0.7).epsilon(1e-14));
  }
}

TEST_CASE("distribution edge cases and small spins") {
  const auto down = distribution(SpinCoherentState::from_j(0.5, kPi));
  CHECK(down.weights == std::vector<double>{1.0, 0.0});

  const auto one = distribution(SpinCoherentState::from_j(1.0, kPi / 2));
  CHECK(one.weights[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(one.weights[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.weights[2] == doctest::Approx(0.25).epsilon(1e-15));

  const auto sym = distribution(SpinCoherentState::from_j(6.5, kPi / 2));
  CHECK(sym.weights.size() == 14);
  for (int k = 0; k < 14; ++k) CHECK(sym.weights[k] == doctest::Approx(sym.weights[13 - k]).epsilon(1e-14));

  CHECK_THROWS_AS(SpinCoherentState::from_j(0.3, 0.1), DomainError);
  CHECK_THROWS_AS(SpinCoherentState::from_j(1.0, -0.1), DomainError);
  CHECK_THROWS_AS(SpinCoherentState::from_j(1.0, 3.5), DomainError);
}

TEST_CASE("distribution matches brute force for j = 13/2") {
  for (double theta : {kPi / 2, kPi / 4}) {
    const auto d = distribution(SpinCoherentState::from_j(6.5, theta));
    const auto ref = brute_force(13, theta);
    for (int k = 0; k <= 13; ++k) CHECK(std::abs(d.weights[k] - ref[k]) < 1e-12);
  }
  const auto d = distribution(SpinCoherentState::from_j(6.5, kPi / 4));
  CHECK(d.m(d.argmax()) == 4.5);
}

TEST_CASE("normalization, symmetry and phase independence") {
  for (double j : {0.5, 7.0, 100.5, 1e4}) {
    for (double theta : {0.3, kPi / 2, 2.0}) {
      const auto d = distribution(SpinCoherentState::from_j(j, theta));
      double sum = 0.0;
      for (double w : d.weights) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      CHECK(d.normalization_defect < 1e-10);

      const auto mirror = distribution(SpinCoherentState::from_j(j, kPi - theta));
      const std::size_t n = d.weights.size();
      for (std::size_t k = 0; k < n; k += std::max<std::size_t>(1, n / 50)) {
        CHECK(mirror.weights[n - 1 - k] == doctest::Approx(d.weights[k]).epsilon(1e-9));
      }
    }
  }
  const auto a = distribution(SpinCoherentState::from_j(40, 1.1, 0.0));
  const auto b = distribution(SpinCoherentState::from_j(40, 1.1, 1.0));
  const auto c = distribution(SpinCoherentState::from_j(40, 1.1, kPi));
  CHECK(a.weights == b.weights);
  CHECK(a.weights == c.weights);
}

TEST_CASE("stirling exponent") {
  for (double theta : {0.4, kPi / 4, kPi / 2, 2.5}) {
    const double x0 = std::pow(std::cos(theta / 2), 2);
    CHECK(std::abs(stirling_log_weight(theta, x0)) < 1e-14);
    for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
      if (std::abs(x - x0) > 1e-6) CHECK(stirling_log_weight(theta, x) < 0.0);
    }
  }
  // second-order expansion around x0 = 1/2: f ~ -(x - x0)^2 / (2 x0 (1 - x0))
  const double x0 = 0.5;
  for (double dx : {1e-2, 1e-3}) {
    const double quad = -dx * dx / (2.0 * x0 * (1.0 - x0));
    CHECK(std::abs(stirling_log_weight(kPi / 2, x0 + dx) - quad) < 2.0 * std::pow(dx, 4));
  }
  CHECK(stirling_log_weight(kPi / 2, 0.25) < 0.0);
  CHECK_THROWS_AS(stirling_log_weight(kPi / 2, 0.0), DomainError);
  CHECK_THROWS_AS(stirling_log_weight(kPi / 2, 1.0), DomainError);
  CHECK_THROWS_AS(stirling_log_weight(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(stirling_log_weight(kPi, 0.5), DomainError);
}

TEST_CASE("stirling form tracks the exact log weights") {
  const double j = 500;
  const int n = 1000;
  for (double theta : {kPi / 4, kPi / 2}) {
    const auto s = SpinCoherentState::from_j(j, theta);
    double worst = 0.0;
    for (int k = 50; k <= 950; ++k) {
      const double x = static_cast<double>(k) / n;
      const double approx = n * stirling_log_weight(theta, x) - 0.5 * std::log(2.0 * kPi * n * x * (1.0 - x));
      worst = std::max(worst, std::abs(log_weight(s, k) - approx));
    }
    // leading omitted term is 1/(12 n x (1-x)) < 2e-3 on this range
    CHECK(worst < 2e-3);
    CHECK(std::abs(distribution(s).argmax() - stirling_distribution(s).argmax()) <= 1);
  }
}

TEST_CASE("saddle point") {
  const auto half = saddle_point_peak(10, kPi / 2);
  CHECK(half.x0 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(half.m_peak) < 1e-14);
  CHECK(saddle_point_peak(2e5, kPi / 4).m_peak == doctest::Approx(2e5 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(saddle_point_peak(10, 1e-8).x0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(saddle_point_peak(10, 1e-8).m_peak == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(saddle_point_peak(10, 0.0), DomainError);
}

TEST_CASE("argmax follows j cos(theta)") {
  for (double j : {50.0, 51.5, 400.0, 2e5}) {
    for (double theta : {kPi / 6, kPi / 4, kPi / 2, 3 * kPi / 4}) {
      const auto r = classical_limit_diagnostics(j, theta);
      CHECK(r.deviation <= 1.0);
    }
  }
}

TEST_CASE("relative width shrinks as one over sqrt(2j)") {
  const auto r50 = classical_limit_diagnostics(50, kPi / 4);
  const auto r200 = classical_limit_diagnostics(200, kPi / 4);
  CHECK(r200.relative_width / r50.relative_width == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r50.relative_width == doctest::Approx(r50.predicted_width).epsilon(1e-10));

  const auto r_half = classical_limit_diagnostics(0.5, kPi / 2);
  CHECK(r_half.relative_width > r50.relative_width);
  CHECK(r_half.relative_width == doctest::Approx(1.0).epsilon(1e-12));
}
