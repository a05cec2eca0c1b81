#include <chrono>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/spin_coherent.hpp"
#include "qratio/stern_gerlach.hpp"

using namespace qratio;
using namespace qratio::sg;
using grid::Grid;

namespace {

constexpr double kM = kHbar;  // hbar / m = 1 m^2/s

// gradient whose force mu_B b0 equals f hbar (per metre)
double gradient_for(double f) { return f * kHbar / kBohrMagneton; }

SpinorField spinor_on(const Grid& g, cplx cu, cplx cd, double a = 4.0) {
  const std::array<GaussianPacket, 2> p{GaussianPacket{0.0, a, 0.0, kM}, GaussianPacket{0.0, a, 0.0, kM}};
  return make_spinor(g, p, cu, cd);
}

}  // namespace

TEST_CASE("precession frequency") {
  // 2 mu_B B / hbar at 0.1 T
  CHECK(precession_frequency(0.1) == doctest::Approx(2 * 9.2740100783e-24 * 0.1 / 1.054571817e-34).epsilon(1e-9));
  CHECK(precession_frequency(0.1) == doctest::Approx(1.76e10).epsilon(2e-3));
  CHECK(precession_frequency(0.0) == 0.0);
  CHECK(precession_frequency(0.3) == doctest::Approx(3 * precession_frequency(0.1)).epsilon(1e-14));
  CHECK_THROWS_AS(precession_frequency(-1.0), DomainError);
}

TEST_CASE("spinor amplitudes are validated") {
  const auto g = Grid::plane(64.0, 64, 64.0, 64);
  CHECK_THROWS_AS(spinor_on(g, 1.0, 1.0), DomainError);
  CHECK_NOTHROW(spinor_on(g, std::sqrt(0.3), cplx(0.0, std::sqrt(0.7))));
}

TEST_CASE("decoupled: single component deflects with mu_B b0 t") {
  const auto g = Grid::plane(64.0, 128, 128.0, 256);
  SGFieldConfig cfg{0.0, gradient_for(0.2), 0.0, 0.0};
  grid::PropagationOptions opt;
  opt.record_every = 20;
  const auto run = propagate_decoupled(spinor_on(g, 1.0, 0.0), cfg, 0.01, 400, opt);
  const auto& tr = run.traces[0];
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double expected = kBohrMagneton * cfg.gradient_b0 * tr.times[i];
    if (i > 0) CHECK(std::abs(tr.mean_momentum[i][1] / expected - 1.0) < 1e-6);
    CHECK(std::abs(tr.mean_momentum[i][0]) < 1e-12 * kHbar);
  }
  const auto& down = run.traces[1];
  CHECK(down.mean_momentum.back()[1] == doctest::Approx(-kBohrMagneton * cfg.gradient_b0 * 4.0).epsilon(1e-6));
  CHECK(run.stats[0].max_norm_drift_per_step < 1e-10);
  CHECK(run.stats[1].max_norm_drift_per_step < 1e-10);
}

TEST_CASE("decoupled: mirror symmetry of the two components") {
  const auto g = Grid::plane(64.0, 64, 128.0, 256);
  SGFieldConfig cfg{0.0, gradient_for(0.2), 0.0, 0.0};
  const auto run = propagate_decoupled(spinor_on(g, std::sqrt(0.5), std::sqrt(0.5)), cfg, 0.01, 300);
  const auto up = run.spinor.density(0);
  const auto down = run.spinor.density(1);
  double worst = 0.0;
  const std::size_t nz = g.points[1];
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    // z -> -z maps index j to nz - j (mod nz) on the centred grid
    for (std::size_t j = 1; j < nz; ++j) {
      worst = std::max(worst, std::abs(up[i * nz + j] - down[i * nz + (nz - j)]));
    }
  }
  CHECK(worst < 1e-9);
  CHECK(run.traces[0].size() == 0);
}

TEST_CASE("decoupled: time reversal") {
  const auto g = Grid::plane(64.0, 64, 64.0, 128);
  SGFieldConfig cfg{0.0, gradient_for(0.1), 0.0, 0.0};
  const auto s0 = spinor_on(g, std::sqrt(0.5), std::sqrt(0.5));
  const auto fwd = propagate_decoupled(s0, cfg, 0.02, 200);
  const auto back = propagate_decoupled(fwd.spinor, cfg, -0.02, 200);
  CHECK(grid::l2_distance(back.spinor.up, s0.up) < 1e-8);
  CHECK(grid::l2_distance(back.spinor.down, s0.down) < 1e-8);
}

TEST_CASE("band separation kinematics") {
  SGFieldConfig cfg{1.0, 10.0, 0.035, 500.0};
  const double m = 108 * kAmu;
  const double tau = 0.035 / 500.0;
  const double a = kBohrMagneton * 10.0 / m;
  const double td = 0.2 / 500.0;
  CHECK(band_separation(cfg, m, kBohrMagneton, td) ==
        doctest::Approx(2 * (0.5 * a * tau * tau + a * tau * td)).epsilon(1e-14));
  CHECK_THROWS_AS(band_separation(cfg, 0.0, kBohrMagneton, td), DomainError);
}

TEST_CASE("band separation matches a decoupled grid run") {
  // field region then free drift, both on the grid
  const auto g = Grid::plane(64.0, 64, 256.0, 512);
  const double f = 0.1;
  SGFieldConfig cfg{0.0, gradient_for(f), 1.0, 1.0 / 8.0};  // tau = 8 s
  const auto s0 = spinor_on(g, std::sqrt(0.5), std::sqrt(0.5));
  auto in_field = propagate_decoupled(s0, cfg, 0.01, 800);
  SGFieldConfig off = cfg;
  off.gradient_b0 = 0.0;
  const auto drift = propagate_decoupled(in_field.spinor, off, 0.01, 400);
  const double zu = grid::observables(drift.spinor.up).mean_position[1];
  const double zd = grid::observables(drift.spinor.down).mean_position[1];
  const double expected = band_separation(cfg, kM, kBohrMagneton, 4.0);
  CHECK((zu - zd) / expected == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("coupled: no gradient keeps populations") {
  const auto g = Grid::plane(64.0, 64, 64.0, 64);
  SGFieldConfig cfg{1e-6, 0.0, 0.0, 0.0};
  const double dt = std::min(0.02, max_coupled_dt(cfg));
  const auto run = propagate_coupled(spinor_on(g, std::sqrt(0.3), std::sqrt(0.7)), cfg, dt, 100);
  CHECK(run.max_population_change < 1e-10);
  CHECK(run.populations[0] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("coupled: guards") {
  const auto g = Grid::plane(64.0, 64, 64.0, 64);
  SGFieldConfig cfg{0.0, gradient_for(0.01), 0.0, 0.0};
  cfg.B0 = 10 * cfg.gradient_b0 * 32.0;
  const auto s = spinor_on(g, 1.0, 0.0);
  // |B0| below 50 |b0 y_max|
  CHECK_THROWS_AS(propagate_coupled(s, cfg, 1e-6 * max_coupled_dt(cfg), 1), DomainError);
  cfg.B0 = 100 * cfg.gradient_b0 * 32.0;
  CHECK_THROWS_AS(propagate_coupled(s, cfg, 2 * max_coupled_dt(cfg), 1), StepSizeError);
  CHECK_THROWS_AS(propagate_coupled(spinor_on(Grid::line(64.0, 64), 1.0, 0.0), cfg, 1e-3, 1), DomainError);
}

TEST_CASE("coupled: strong field reproduces the decoupled densities") {
  const auto g = Grid::plane(48.0, 64, 64.0, 128);
  const double f = 0.07;
  const double y_max = 24.0;
  const double duration = 4.0;
  const auto s0 = spinor_on(g, std::sqrt(0.5), std::sqrt(0.5), 5.0);
  SGFieldConfig base{0.0, gradient_for(f), 0.0, 0.0};
  const auto dec = propagate_decoupled(s0, base, duration / 400, 400);
  double prev = 1.0;
  for (double ratio : {50.0, 100.0}) {
    SGFieldConfig cfg = base;
    cfg.B0 = ratio * cfg.gradient_b0 * y_max;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / max_coupled_dt(cfg)));
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = propagate_coupled(s0, cfg, duration / steps, steps);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double l1 = density_l1_distance(run.spinor, dec.spinor);
    MESSAGE("ratio " << ratio << " steps " << steps << " l1 " << l1 << " transfer "
                     << run.max_population_change << " time " << secs);
    CHECK(l1 < prev);
    CHECK(run.max_norm_drift_per_step < 1e-10);
    prev = l1;
  }
}

TEST_CASE("large spin bands") {
  SGFieldConfig cfg{1.0, 10.0, 0.035, 500.0};
  const double m = 108 * kAmu;
  const double td = 0.2 / 500.0;

  const auto half = large_spin_bands(0.5, 1.0, 0.0, cfg, td, m, kBohrMagneton);
  REQUIRE(half.size() == 2);
  CHECK(half[1].weight == doctest::Approx(std::pow(std::cos(0.5), 2)).epsilon(1e-14));
  CHECK(half[0].weight == doctest::Approx(std::pow(std::sin(0.5), 2)).epsilon(1e-14));
  CHECK(half[1].z - half[0].z == doctest::Approx(band_separation(cfg, m, kBohrMagneton, td)).epsilon(1e-14));

  const auto b13 = large_spin_bands(6.5, kPi / 2, 0.0, cfg, td, m, kBohrMagneton);
  REQUIRE(b13.size() == 14);
  for (std::size_t k = 0; k < 14; ++k) {
    CHECK(b13[k].weight == doctest::Approx(b13[13 - k].weight).epsilon(1e-13));
    CHECK(b13[k].z == doctest::Approx(-b13[13 - k].z).epsilon(1e-13));
  }
  const auto ref = spin::distribution(spin::SpinCoherentState::from_j(6.5, kPi / 2));
  for (std::size_t k = 0; k < 14; ++k) CHECK(b13[k].weight == ref.weights[k]);

  const double j = 2e5;
  const auto big = large_spin_bands(j, kPi / 4, 0.0, cfg, td, m, kBohrMagneton);
  double total = 0.0, mean = 0.0;
  for (const auto& b : big) {
    total += b.weight;
    mean += b.weight * b.z;
  }
  CHECK(std::abs(total - 1.0) < 1e-9);
  const double classical = std::cos(kPi / 4) * 0.5 * band_separation(cfg, m, kBohrMagneton, td);
  CHECK(std::abs(mean / classical - 1.0) < 1e-3);
  double var = 0.0;
  for (const auto& b : big) var += b.weight * (b.z - mean) * (b.z - mean);
  const double sd = std::sqrt(var);
  double outside = 0.0;
  for (const auto& b : big) {
    if (std::abs(b.z - mean) > 3 * sd) outside += b.weight;
  }
  CHECK(outside < 0.01);
  CHECK_THROWS_AS(large_spin_bands(2e6, 1.0, 0.0, cfg, td, m, kBohrMagneton), DomainError);
}
