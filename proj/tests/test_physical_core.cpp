#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "qratio/catalog.hpp"
#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/gaussian_packet.hpp"
#include "qratio/quantum_ratio.hpp"
#include "qratio/units.hpp"

using namespace qratio;

TEST_CASE("constants are consistent") {
  CHECK(kConstants.hbar > 0.0);
  CHECK(std::abs(kConstants.planck_h / (2.0 * kPi * kConstants.hbar) - 1.0) < 1e-12);
  CHECK(kConstants.bohr_magneton > 0.0);
  CHECK(kConstants.atomic_mass_unit > 0.0);
  CHECK(kConstants.electron_mass > 0.0);
}

TEST_CASE("quantum ratio classification") {
  const auto ag = quantum_ratio(0.2e-3, 1.44e-10);
  CHECK(ag.value == doctest::Approx(1.3889e6).epsilon(1e-4));
  CHECK(ag.regime == Regime::Quantum);

  const auto point = quantum_ratio(1.0, 0.0);
  CHECK(std::isinf(point.value));
  CHECK(point.regime == Regime::Infinite);

  const auto unit = quantum_ratio(1.0, 1.0);
  CHECK(unit.value == 1.0);
  CHECK(unit.regime == Regime::Classical);

  CHECK(quantum_ratio(5.0, 1.0).regime == Regime::Crossover);
  CHECK(quantum_ratio(10.0, 1.0).regime == Regime::Crossover);
  CHECK(quantum_ratio(10.5, 1.0).regime == Regime::Quantum);

  CHECK_THROWS_AS(quantum_ratio(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(quantum_ratio(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(quantum_ratio(1.0, -1.0), DomainError);
}

TEST_CASE("quantum ratio is scale invariant") {
  for (double k : {1e-6, 0.37, 3.0, 1e9}) {
    CHECK(quantum_ratio(k * 0.2e-3, k * 1.44e-10).value ==
          doctest::Approx(quantum_ratio(0.2e-3, 1.44e-10).value).epsilon(1e-14));
  }
}

TEST_CASE("body size is the largest spread") {
  const std::vector<double> a{1.0e-10, 2.0e-10, 0.5e-10};
  CHECK(body_size(a) == 2.0e-10);
  const std::vector<double> zero{0.0};
  CHECK(body_size(zero) == 0.0);

  // 47 + 47 + 51 constituents of a silver atom, outermost shell at 1.4 A
  std::vector<double> silver;
  for (int i = 0; i < 47; ++i) silver.push_back(1e-15);
  for (int i = 0; i < 47; ++i) silver.push_back(0.01e-10 + 1.3e-10 * i / 46.0);
  for (int i = 0; i < 51; ++i) silver.push_back(1e-15);
  silver[60] = 1.4e-10;
  CHECK(body_size(silver) == 1.4e-10);

  std::vector<double> reversed(a.rbegin(), a.rend());
  CHECK(body_size(reversed) == body_size(a));

  CHECK_THROWS_AS(body_size(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(body_size(std::vector<double>{1.0, -1.0}), DomainError);
}

TEST_CASE("de Broglie wavelength") {
  // h / (m v) by hand
  CHECK(de_broglie_wavelength(9.1093837015e-31, 1e6) ==
        doctest::Approx(6.62607015e-34 / (9.1093837015e-31 * 1e6)).epsilon(1e-12));
  CHECK(de_broglie_wavelength(9.1093837015e-31, 1e6) == doctest::Approx(7.27e-10).epsilon(1e-3));
  const double c70 = 840.0 * 1.66053906660e-27;
  CHECK(de_broglie_wavelength(c70, 100.0) == doctest::Approx(4.75e-12).epsilon(2e-3));
  CHECK(de_broglie_wavelength(2.0 * c70, 100.0) ==
        doctest::Approx(0.5 * de_broglie_wavelength(c70, 100.0)).epsilon(1e-14));
  CHECK_THROWS_AS(de_broglie_wavelength(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(de_broglie_wavelength(1.0, -1.0), DomainError);
}

TEST_CASE("free packet width") {
  const GaussianPacket p{0.0, 1e-6, 0.0, kElectronMass};
  CHECK(packet_width_at(p, 0.0) == p.width);
  const double t1 = p.mass * p.width * p.width / (2.0 * kHbar);
  CHECK(packet_width_at(p, t1) == doctest::Approx(std::sqrt(2.0) * p.width).epsilon(1e-14));

  double prev = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double w = packet_width_at(p, i * 0.1 * t1);
    CHECK(w > prev);
    prev = w;
  }
  // asymptotic slope 2 hbar / (m a)
  const double tl = 1e3 * t1;
  const double slope = 2.0 * kHbar / (p.mass * p.width);
  CHECK(packet_width_at(p, tl) / (slope * tl) == doctest::Approx(1.0).epsilon(0.01));

  CHECK_THROWS_AS(packet_width_at(p, -1.0), DomainError);
  CHECK_THROWS_AS(packet_width_at(GaussianPacket{0.0, 0.0, 0.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("doubling time") {
  const double a = 1e-6;
  const double m = 9e-31;
  const double t = doubling_time(m, a);
  CHECK(packet_width_at(GaussianPacket{0.0, a, 0.0, m}, t) == doctest::Approx(2.0 * a).epsilon(1e-13));

  // linear in mass, quadratic in width across three decades
  for (double k : {10.0, 100.0, 1000.0}) {
    CHECK(doubling_time(k * m, a) / t == doctest::Approx(k).epsilon(1e-13));
    CHECK(doubling_time(m, k * a) / t == doctest::Approx(k * k).epsilon(1e-13));
  }

  // table of diffusion times, factor-2 band
  const std::array<std::pair<double, double>, 3> rows{
      std::pair{9e-31, 1e-8}, std::pair{1.6e-27, 1.6e-5}, std::pair{1e-3, 1e19}};
  for (const auto& [mass, ref] : rows) {
    const double r = doubling_time(mass, a) / ref;
    CHECK(r > 0.5);
    CHECK(r < 2.0);
  }
  CHECK_THROWS_AS(doubling_time(0.0, a), DomainError);
  CHECK_THROWS_AS(doubling_time(m, 0.0), DomainError);
}

TEST_CASE("unit parsing") {
  CHECK(parse_quantity_as("0.2 mm", Dimension::Length) == doctest::Approx(2e-4).epsilon(1e-15));
  CHECK(parse_quantity_as("1.44 angstrom", Dimension::Length) == doctest::Approx(1.44e-10).epsilon(1e-15));
  CHECK(parse_quantity_as("108 amu", Dimension::Mass) == doctest::Approx(108 * 1.66053906660e-27).epsilon(1e-15));
  CHECK(parse_quantity_as("1 eV", Dimension::Energy) == doctest::Approx(1.602176634e-19).epsilon(1e-15));
  CHECK(parse_quantity_as("1e3 G", Dimension::MagneticField) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(parse_quantity_as("pi/4", Dimension::Dimensionless) == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(parse_quantity_as("13/2", Dimension::Dimensionless) == 6.5);
  CHECK(parse_quantity_as("pi/4 rad", Dimension::Angle) == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(parse_quantity_as("45 deg", Dimension::Angle) == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(parse_quantity_as("1 g", Dimension::Mass) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK_THROWS_AS(parse_quantity_as("0.2", Dimension::Length), DomainError);
  CHECK_THROWS_AS(parse_quantity_as("0.2 furlong", Dimension::Length), DomainError);
  CHECK_THROWS_AS(parse_quantity_as("0.2 kg", Dimension::Length), DomainError);
  CHECK_THROWS_AS(parse_number_expression("2**3"), DomainError);

  for (double v : {1.0 / 3.0, 6.02214076e23, 1.44e-10, -2.5e-300}) {
    const std::string s = format_quantity(v, Dimension::Length);
    CHECK(parse_quantity_as(s, Dimension::Length) == v);
  }
}

TEST_CASE("catalog lookup") {
  const auto& cat = Catalog::builtin();
  const auto& e = cat.particle("electron");
  CHECK(e.mass == doctest::Approx(0.51099895 * 1.602176634e-13 / (299792458.0 * 299792458.0)).epsilon(1e-12));
  CHECK(e.mass == doctest::Approx(kElectronMass).epsilon(1e-8));
  CHECK(e.size_L0 == 0.0);

  const auto& c70 = cat.experiment("C70");
  CHECK(c70.mass_amu == doctest::Approx(840.0).epsilon(1e-12));
  CHECK(c70.size_L0 == doctest::Approx(9.4e-10).epsilon(1e-12));

  CHECK_THROWS_AS(cat.lookup("unknown"), LookupError);
  try {
    cat.lookup("unknown");
  } catch (const LookupError& err) {
    CHECK(std::string(err.what()).find("electron") != std::string::npos);
  }
  CHECK(cat.experiments().size() == 4);
  CHECK(cat.version() == 1);
}

TEST_CASE("catalog extension and schema errors") {
  auto cat = Catalog::builtin();
  cat.merge("format = qratio-catalog\nversion = 1\n[particle neutron]\nmass = 939.565 MeV/c2\nsize = 0.8 fm\n");
  CHECK(cat.particle("neutron").size_L0 == doctest::Approx(0.8e-15).epsilon(1e-12));
  CHECK_THROWS_AS(Catalog::parse("[particle x]\nmass = 1\nsize = 0 m\n"), ConfigError);
  CHECK_THROWS_AS(Catalog::parse("[particle x]\nmass = 0 kg\nsize = 0 m\n"), ConfigError);
  CHECK_THROWS_AS(Catalog::parse("[particle x]\nmass = 1 kg\nsize = 0 m\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(Catalog::parse("[experiment x]\nmass = 1 kg\nsize = 0 m\nquantum_range = 0 m\n"),
                  ConfigError);
}
