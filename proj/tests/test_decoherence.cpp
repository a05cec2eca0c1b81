#include <cmath>

#include "doctest.h"
#include "qratio/constants.hpp"
#include "qratio/decoherence.hpp"
#include "qratio/error.hpp"

using namespace qratio;
using namespace qratio::decoherence;
using grid::Grid;

namespace {

constexpr double kM = kHbar;

// c1 psi(x - x1) + c2 psi(x - x2), normalized
grid::WaveField split_packet(const Grid& g, double x1, double x2, double a, cplx c1, cplx c2) {
  const auto p1 = grid::gaussian_samples(g, 0, GaussianPacket{x1, a, 0.0, kM});
  const auto p2 = grid::gaussian_samples(g, 0, GaussianPacket{x2, a, 0.0, kM});
  grid::WaveField f;
  f.grid = g;
  f.mass = kM;
  f.psi.resize(g.size());
  // each Gaussian normalized separately: integral exp(-2u^2/a^2) = a sqrt(pi/2)
  const double s = 1.0 / std::sqrt(a * std::sqrt(kPi / 2));
  for (std::size_t i = 0; i < g.size(); ++i) f.psi[i] = s * (c1 * p1[i] + c2 * p2[i]);
  return f;
}

}  // namespace

TEST_CASE("localization rate limits") {
  const EnvironmentSpec env{2.0, 5.0};
  CHECK(localization_rate(env, 0.0) == 0.0);
  CHECK(localization_rate(env, 2.0) == doctest::Approx(5.0 * (1 - std::exp(-1.0))).epsilon(1e-15));
  CHECK(localization_rate(env, 2.0) / 5.0 == doctest::Approx(0.632).epsilon(1e-3));
  CHECK(localization_rate(env, 100.0) == doctest::Approx(5.0).epsilon(1e-15));
  // quadratic at short distance
  CHECK(localization_rate(env, 1e-3) == doctest::Approx(5.0 * 1e-6 / 4.0).epsilon(1e-6));
  CHECK_THROWS_AS(EnvironmentSpec({0.0, 1.0}).validate(), DomainError);
}

TEST_CASE("pure state density matrix") {
  const auto g = Grid::line(100.0, 256);
  const auto f = split_packet(g, -20.0, 20.0, 3.0, std::sqrt(0.5), std::sqrt(0.5));
  const auto rho = pure_to_density(f);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-9);
  CHECK(std::abs(rho.purity() - 1.0) < 1e-9);
  const auto d = rho.diagonal();
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == std::norm(f.psi[i]));
  CHECK(coherence(rho, -20.0, 20.0) == doctest::Approx(1.0).epsilon(1e-12));

  // off-diagonal block at the centres: |c1 c2| times the peak density
  const double peak = 1.0 / (3.0 * std::sqrt(kPi / 2));
  const std::size_t i1 = 128 - 20 * 256 / 100, i2 = 128 + 20 * 256 / 100;
  const double x1 = g.coord(0, i1), x2 = g.coord(0, i2);
  const double expect = 0.5 * peak * std::exp(-std::pow(x1 + 20.0, 2) / 9.0) * std::exp(-std::pow(x2 - 20.0, 2) / 9.0);
  CHECK(std::abs(rho.at(i1, i2)) == doctest::Approx(expect).epsilon(1e-6));

  const auto big = Grid::line(100.0, 2048);
  CHECK_THROWS_AS(pure_to_density(grid::initialize_gaussian(big, std::array{GaussianPacket{0, 3, 0, kM}})),
                  ResolutionError);
}

TEST_CASE("pure damping: exponential decay of distant coherence, diagonal untouched") {
  const auto g = Grid::line(100.0, 256);
  const EnvironmentSpec env{2.0, 1.0};  // separation 40 >> lambda
  auto rho = pure_to_density(split_packet(g, -20.0, 20.0, 3.0, std::sqrt(0.5), std::sqrt(0.5)));
  const auto d0 = rho.diagonal();
  const double c0 = coherence(rho, -20.0, 20.0);
  const Decoherer step(g, kM, env, std::nullopt, 0.01);
  double purity = rho.purity();
  for (int s = 0; s < 300; ++s) {
    step.step(rho);
    const double p = rho.purity();
    CHECK(p <= purity);
    purity = p;
    if (s == 99) CHECK(coherence(rho, -20.0, 20.0) / c0 == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
  }
  CHECK(std::abs(coherence(rho, -20.0, 20.0) / c0 - std::exp(-3.0)) < 1e-6);
  const auto d1 = rho.diagonal();
  double drift = 0.0;
  for (std::size_t i = 0; i < d0.size(); ++i) drift = std::max(drift, std::abs(d1[i] - d0[i]));
  CHECK(drift < 1e-12);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-9);

  // closed-form damping agrees with stepping
  const auto direct = damp(pure_to_density(split_packet(g, -20.0, 20.0, 3.0, std::sqrt(0.5), std::sqrt(0.5))), env, 3.0);
  CHECK(coherence(direct, -20.0, 20.0) == doctest::Approx(coherence(rho, -20.0, 20.0)).epsilon(1e-9));
}

TEST_CASE("fully decohered mixture has no coherence") {
  const auto g = Grid::line(100.0, 256);
  const auto rho = damp(pure_to_density(split_packet(g, -20.0, 20.0, 3.0, std::sqrt(0.5), std::sqrt(0.5))),
                        EnvironmentSpec{2.0, 1.0}, 50.0);
  CHECK(coherence(rho, -20.0, 20.0) < 1e-6);
  CHECK_THROWS_AS(coherence(rho, -20.0, 80.0), DomainError);
}

TEST_CASE("unitary part: free evolution of a density matrix matches the wave function") {
  const auto g = Grid::line(100.0, 256);
  const GaussianPacket p{-10.0, 4.0, 0.5 * kHbar, kM};
  const auto f0 = grid::initialize_gaussian(g, std::span(&p, 1));
  auto rho = pure_to_density(f0);
  const EnvironmentSpec weak{1.0, 1e-30};
  const Decoherer step(g, kM, weak, grid::PotentialSpec::free(), 0.02);
  for (int s = 0; s < 500; ++s) step.step(rho);
  const auto f = grid::propagate(f0, grid::PotentialSpec::free(), 0.02, 500);
  const auto ref = pure_to_density(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.rho.size(); ++i) worst = std::max(worst, std::abs(rho.rho[i] - ref.rho[i]));
  CHECK(worst < 1e-12);
  CHECK(rho.hermiticity_defect() < 1e-10);
  CHECK(rho.time == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("trace, hermiticity and positivity over long evolution") {
  const auto g = Grid::line(100.0, 128);
  const EnvironmentSpec env{3.0, 0.5};
  auto rho = pure_to_density(split_packet(g, -15.0, 15.0, 4.0, std::sqrt(0.3), cplx(0, std::sqrt(0.7))));
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.002 * kHbar * std::pow(g.coord(0, i), 2);
  const Decoherer step(g, kM, env, grid::PotentialSpec{grid::Custom{v}}, 0.02);
  double drift = 0.0;
  for (int s = 0; s < 1000; ++s) {
    step.step(rho);
    drift = std::max(drift, std::abs(rho.trace() - 1.0));
  }
  CHECK(drift < 1e-9);
  CHECK(rho.hermiticity_defect() < 1e-10);
  CHECK(min_eigenvalue(rho) >= -1e-8);
}

TEST_CASE("timescale report flags") {
  TimescaleInputs in;
  in.packet_width = 1e-6;
  in.separation = 1e-3;
  in.env = {1e-5, 1e9};
  in.transit_length = 0.01;
  in.transit_speed = 500.0;
  in.mass = 108 * kAmu;
  in.tau_diss = 1.0;
  const auto ok = timescale_report(in);
  CHECK(ok.tau_trans == doctest::Approx(2e-5).epsilon(1e-14));
  CHECK(ok.tau_diff == doctest::Approx(108 * kAmu * 1e-12 / kHbar).epsilon(1e-14));
  CHECK(ok.tau_dec == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK(ok.timescales_ordered);
  CHECK(ok.packets_separated);
  CHECK(ok.wavelength_between);
  CHECK(ok.verdict == "mixture reliable");

  auto wide = in;
  wide.env.lambda_env = 2e-3;
  CHECK_FALSE(timescale_report(wide).wavelength_between);

  auto hot = in;
  hot.tau_diss = 1e-6;
  const auto r = timescale_report(hot);
  CHECK(r.random_motion);
  CHECK(r.verdict == "random-motion regime, mixture description unreliable");
  auto bad = in;
  bad.mass = 0.0;
  CHECK_THROWS_AS(timescale_report(bad), DomainError);
}

TEST_CASE("unitary part with a linear potential matches the wave function") {
  const auto g = Grid::line(100.0, 256);
  const GaussianPacket p{-5.0, 4.0, 0.0, kM};
  const auto f0 = grid::initialize_gaussian(g, std::span(&p, 1));
  const auto pot = grid::PotentialSpec::linear(-0.2 * kHbar);
  auto rho = pure_to_density(f0);
  const Decoherer step(g, kM, EnvironmentSpec{1.0, 1e-30}, pot, 0.02);
  for (int s = 0; s < 400; ++s) step.step(rho);
  const auto ref = pure_to_density(grid::propagate(f0, pot, 0.02, 400));
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.rho.size(); ++i) worst = std::max(worst, std::abs(rho.rho[i] - ref.rho[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("decohered Stern-Gerlach bands keep the spin weights") {
  // a = 3 << lambda = 10 << band separation ~ 29
  SGDecoherenceConfig cfg;
  cfg.grid = Grid::line(160.0, 256);
  cfg.packet = GaussianPacket{0.0, 3.0, 0.0, kM};
  cfg.c_up = std::sqrt(0.3);
  cfg.c_down = std::sqrt(0.7);
  cfg.field.gradient_b0 = 0.2 * kHbar / kBohrMagneton;
  cfg.env = {10.0, 1.0};
  cfg.duration = 12.0;
  cfg.steps = 600;
  cfg.record_every = 100;
  const auto r = decohered_sg_scenario(cfg);
  CHECK(std::abs(r.band_weights[0] - 0.3) < 1e-9);
  CHECK(std::abs(r.band_weights[1] - 0.7) < 1e-9);
  // centres follow F t^2 / 2m = 14.4 with or without damping
  CHECK(r.band_centres[0] == doctest::Approx(14.4).epsilon(1e-3));
  CHECK(r.band_centres[1] == doctest::Approx(-14.4).epsilon(1e-3));
  // momentum diffusion widens the bands, so screen intensities shift slightly
  CHECK(std::abs(r.pure_intensities[0] - 0.3) < 5e-4);
  CHECK(std::abs(r.intensities[0] - 0.3) < 3e-3);
  CHECK(r.intensities[0] + r.intensities[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.interband_coherence < 0.01);
  CHECK(r.max_trace_drift < 1e-9);
  CHECK(r.coherence_trace.size() == 6);
  for (std::size_t k = 1; k < r.coherence_trace.size(); ++k) {
    CHECK(r.coherence_trace[k] < r.coherence_trace[k - 1]);
  }

  cfg.c_up = 1.0;
  cfg.c_down = 0.0;
  const auto single = decohered_sg_scenario(cfg);
  CHECK(single.band_weights[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(single.interband_coherence == 0.0);

  cfg.field.gradient_b0 = 0.5 * kHbar / kBohrMagneton;
  CHECK_THROWS_AS(decohered_sg_scenario(cfg), ResolutionError);
}
