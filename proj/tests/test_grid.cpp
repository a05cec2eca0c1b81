#include <cmath>
#include <vector>

#include "doctest.h"
#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/gaussian_packet.hpp"
#include "qratio/grid.hpp"

using namespace qratio;
using namespace qratio::grid;

namespace {

// mass = hbar makes hbar/m = 1 m^2/s, so positions and times stay O(1)
constexpr double kM = kHbar;

WaveField packet_1d(const Grid& g, double x0, double a, double k0) {
  const GaussianPacket p{x0, a, k0 * kHbar, kM};
  return initialize_gaussian(g, std::span(&p, 1));
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(Grid::line(1.0, 64));
  CHECK_THROWS_AS(Grid::line(1.0, 32), ResolutionError);
  CHECK_THROWS_AS(Grid::line(1.0, 100), ResolutionError);
  CHECK_THROWS_AS(Grid::line(0.0, 64), ResolutionError);
  CHECK_THROWS_AS(Grid::plane(1.0, 64, 1.0, 48), ResolutionError);
  const auto g = Grid::line(2.0, 64);
  CHECK(g.coord(0, 0) == -1.0);
  CHECK(g.coord(0, 32) == 0.0);
  CHECK(g.wavenumber(0, 1) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(g.wavenumber(0, 63) == doctest::Approx(-kPi).epsilon(1e-15));
}

TEST_CASE("initial gaussian") {
  const auto g = Grid::line(200.0, 1024);
  const auto f = packet_1d(g, -30.0, 4.0, 2.0);
  CHECK(std::abs(f.norm() - 1.0) < 1e-12);
  const auto s = observables(f);
  CHECK(std::abs(s.mean_position[0] + 30.0) < g.spacing(0) / 10);
  CHECK(std::abs(s.mean_momentum[0] - 2.0 * kHbar) < kHbar / (10 * g.extent[0]));
  // density 1/e half-width a / sqrt(2)
  CHECK(s.widths[0] == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-10));

  const auto rest = observables(packet_1d(g, 0.0, 4.0, 0.0));
  CHECK(std::abs(rest.mean_momentum[0]) < 1e-12 * kHbar / 4.0);
}

TEST_CASE("initial gaussian resolution errors") {
  const auto g = Grid::line(200.0, 1024);  // dx ~ 0.195
  CHECK_THROWS_AS(packet_1d(g, 0.0, 0.5, 0.0), ResolutionError);
  CHECK_THROWS_AS(packet_1d(g, 90.0, 4.0, 0.0), ResolutionError);
  CHECK_THROWS_AS(packet_1d(g, 0.0, 4.0, 20.0), ResolutionError);
  try {
    packet_1d(g, 0.0, 0.5, 0.0);
  } catch (const ResolutionError& e) {
    CHECK(std::string(e.what()).find("4-spacing") != std::string::npos);
  }
}

TEST_CASE("2D product gaussian") {
  const auto g = Grid::plane(100.0, 256, 60.0, 128);
  const std::array<GaussianPacket, 2> p{GaussianPacket{5.0, 4.0, kHbar, kM},
                                        GaussianPacket{-3.0, 3.0, -0.5 * kHbar, kM}};
  const auto f = initialize_gaussian(g, p);
  const auto s = observables(f);
  CHECK(std::abs(f.norm() - 1.0) < 1e-12);
  CHECK(s.mean_position[0] == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(s.mean_position[1] == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(s.mean_momentum[0] == doctest::Approx(kHbar).epsilon(1e-10));
  CHECK(s.mean_momentum[1] == doctest::Approx(-0.5 * kHbar).epsilon(1e-10));
  CHECK(s.widths[1] == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("free evolution follows the analytic packet") {
  const auto g = Grid::line(200.0, 1024);
  const double a = 4.0, x0 = -40.0, k0 = 2.0;
  const auto f0 = packet_1d(g, x0, a, k0);
  const double dt = 0.005;
  const std::size_t steps = 2000;
  PropagationStats stats;
  const auto f = propagate(f0, PotentialSpec::free(), dt, steps, {}, &stats);
  const double t = dt * steps;
  CHECK(f.time == doctest::Approx(t).epsilon(1e-12));
  const auto s = observables(f);
  CHECK(std::abs(s.mean_position[0] - (x0 + k0 * t)) < 1e-3 * g.extent[0]);
  const double expected = packet_width_at(GaussianPacket{x0, a, k0 * kHbar, kM}, t) / std::sqrt(2.0);
  CHECK(s.widths[0] == doctest::Approx(expected).epsilon(0.005));
  CHECK(stats.max_norm_drift_per_step < 1e-10);
  CHECK(stats.steps == steps);
}

TEST_CASE("width error converges under refinement") {
  const double a = 3.0, t = 4.0;
  const double exact = packet_width_at(GaussianPacket{0.0, a, 0.0, kM}, t) / std::sqrt(2.0);
  double prev_err = -1.0;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const auto g = Grid::line(100.0, n);
    const double dt = 0.5 * kPi / 4 / (max_kinetic_energy(g, kM) / kHbar);
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt));
    const auto f = propagate(packet_1d(g, 0.0, a, 0.0), PotentialSpec::free(), t / steps, steps);
    const double err = std::abs(observables(f).widths[0] - exact);
    if (prev_err >= 0.0) CHECK(err <= std::max(prev_err / 4.0, 1e-9));
    prev_err = err;
  }
}

TEST_CASE("linear potential gives exact momentum growth") {
  const auto g = Grid::line(200.0, 1024);
  const double force = 0.5 * kHbar;  // V = -F x
  const auto pot = PotentialSpec::linear(-force);
  ObservableTrace trace;
  PropagationOptions opt;
  opt.record_every = 100;
  const double dt = 0.005;
  const auto f = propagate(packet_1d(g, -20.0, 4.0, 0.0), pot, dt, 2000, opt, nullptr, &trace);
  const auto s = observables(f);
  CHECK(s.mean_momentum[0] / kHbar == doctest::Approx(force * f.time / kHbar).epsilon(1e-9));
  CHECK(trace.size() == 21);
  const auto r = ehrenfest_residual(trace, kM);
  CHECK(r.momentum < 1e-6);
  CHECK(r.position < 1e-6);
}

TEST_CASE("free particle satisfies the Ehrenfest relations") {
  const auto g = Grid::line(200.0, 1024);
  ObservableTrace trace;
  PropagationOptions opt;
  opt.record_every = 50;
  propagate(packet_1d(g, -30.0, 4.0, 1.5), PotentialSpec::free(), 0.005, 1000, opt, nullptr, &trace);
  const auto r = ehrenfest_residual(trace, kM);
  CHECK(r.position < 1e-6);
  CHECK(r.momentum < 1e-6);
  ObservableTrace shortt;
  shortt.times = {0.0, 1.0};
  shortt.mean_position.resize(2);
  shortt.mean_momentum.resize(2);
  shortt.widths.assign(2, {1.0, 1.0});
  shortt.mean_force.resize(2);
  CHECK_THROWS_AS(ehrenfest_residual(shortt, kM), DomainError);
}

TEST_CASE("quartic well Ehrenfest residual") {
  const auto g = Grid::line(50.0, 1024);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * kHbar * std::pow(g.coord(0, i), 4);
  const PotentialSpec pot{Custom{v}};
  ObservableTrace trace;
  PropagationOptions opt;
  opt.record_every = 100;
  propagate(packet_1d(g, 3.0, 1.0, 0.0), pot, 2e-4, 10000, opt, nullptr, &trace);
  const auto r = ehrenfest_residual(trace, kM);
  CHECK(r.position < 1e-3);
  CHECK(r.momentum < 1e-3);
}

TEST_CASE("time reversal") {
  const auto g = Grid::plane(100.0, 128, 100.0, 128);
  const std::array<GaussianPacket, 2> p{GaussianPacket{-10.0, 5.0, kHbar, kM},
                                        GaussianPacket{3.0, 4.0, 0.0, kM}};
  const auto f0 = initialize_gaussian(g, p);
  const auto pot = PotentialSpec::linear(0.3 * kHbar, 1);
  const auto fwd = propagate(f0, pot, 0.02, 300);
  const auto back = propagate(fwd, pot, -0.02, 300);
  CHECK(l2_distance(back, f0) < 1e-8);
  CHECK(std::abs(back.time) < 1e-12);
}

TEST_CASE("step size and boundary guards") {
  const auto g = Grid::line(200.0, 1024);
  const auto f = packet_1d(g, 0.0, 4.0, 1.0);
  const double emax = max_kinetic_energy(g, kM) / kHbar;
  CHECK_THROWS_AS(propagate(f, PotentialSpec::free(), 1.0 / emax, 1), StepSizeError);
  try {
    propagate(f, PotentialSpec::free(), 1.0 / emax, 1);
  } catch (const StepSizeError& e) {
    CHECK(e.suggested_dt() == doctest::Approx(suggest_dt(g, kM, PotentialSpec::free())).epsilon(1e-15));
    CHECK(e.suggested_dt() * emax < kPi / 4);
  }
  CHECK_THROWS_AS(propagate(f, PotentialSpec::free(), 0.005, 0), DomainError);
  // runs into the right-hand margin
  const auto fast = packet_1d(g, 60.0, 4.0, 3.0);
  CHECK_THROWS_AS(propagate(fast, PotentialSpec::free(), 0.005, 4000), BoundaryError);
}

TEST_CASE("absorbing mask is applied and not counted as drift") {
  const auto g = Grid::line(200.0, 1024);
  std::vector<cplx> mask(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.coord(0, i) > 0.0) mask[i] = 0.0;
  }
  const PotentialSpec pot{Mask{mask}};
  PropagationOptions opt;
  opt.monitor_boundary = false;
  PropagationStats stats;
  const auto f = propagate(packet_1d(g, 0.0, 4.0, 0.0), pot, 0.005, 1);
  CHECK(f.norm() == doctest::Approx(0.5).epsilon(0.05));
  propagate(packet_1d(g, -30.0, 4.0, 0.0), pot, 0.005, 10, opt, &stats);
  CHECK(stats.total_norm_drift == 0.0);
}
