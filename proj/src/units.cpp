#include "qratio/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"

namespace qratio {

namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dimension;
  double scale;
};

constexpr double kGauss = 1.0e-4;

constexpr std::array kUnits{
    UnitEntry{"m", Dimension::Length, 1.0},
    UnitEntry{"cm", Dimension::Length, 1.0e-2},
    UnitEntry{"mm", Dimension::Length, 1.0e-3},
    UnitEntry{"um", Dimension::Length, 1.0e-6},
    UnitEntry{"\xc2\xb5m", Dimension::Length, 1.0e-6},  // micro sign
    UnitEntry{"\xce\xbcm", Dimension::Length, 1.0e-6},  // greek mu
    UnitEntry{"nm", Dimension::Length, 1.0e-9},
    UnitEntry{"pm", Dimension::Length, 1.0e-12},
    UnitEntry{"fm", Dimension::Length, 1.0e-15},
    UnitEntry{"angstrom", Dimension::Length, kAngstrom},
    UnitEntry{"AA", Dimension::Length, kAngstrom},
    UnitEntry{"\xc3\x85", Dimension::Length, kAngstrom},  // Å

    UnitEntry{"kg", Dimension::Mass, 1.0},
    UnitEntry{"g", Dimension::Mass, 1.0e-3},
    UnitEntry{"mg", Dimension::Mass, 1.0e-6},
    UnitEntry{"amu", Dimension::Mass, kAmu},
    UnitEntry{"u", Dimension::Mass, kAmu},
    UnitEntry{"au", Dimension::Mass, kAmu},
    UnitEntry{"eV/c2", Dimension::Mass, 1.0e-6 * kMeVPerC2},
    UnitEntry{"MeV/c2", Dimension::Mass, kMeVPerC2},
    UnitEntry{"MeV/c^2", Dimension::Mass, kMeVPerC2},
    UnitEntry{"GeV/c2", Dimension::Mass, 1.0e3 * kMeVPerC2},
    UnitEntry{"GeV/c^2", Dimension::Mass, 1.0e3 * kMeVPerC2},

    UnitEntry{"s", Dimension::Time, 1.0},
    UnitEntry{"ms", Dimension::Time, 1.0e-3},
    UnitEntry{"us", Dimension::Time, 1.0e-6},
    UnitEntry{"\xc2\xb5s", Dimension::Time, 1.0e-6},
    UnitEntry{"ns", Dimension::Time, 1.0e-9},
    UnitEntry{"ps", Dimension::Time, 1.0e-12},
    UnitEntry{"fs", Dimension::Time, 1.0e-15},

    UnitEntry{"J", Dimension::Energy, 1.0},
    UnitEntry{"eV", Dimension::Energy, kElectronVolt},
    UnitEntry{"meV", Dimension::Energy, 1.0e-3 * kElectronVolt},
    UnitEntry{"keV", Dimension::Energy, 1.0e3 * kElectronVolt},
    UnitEntry{"MeV", Dimension::Energy, 1.0e6 * kElectronVolt},

    UnitEntry{"m/s", Dimension::Speed, 1.0},
    UnitEntry{"km/s", Dimension::Speed, 1.0e3},
    UnitEntry{"mm/s", Dimension::Speed, 1.0e-3},

    UnitEntry{"T", Dimension::MagneticField, 1.0},
    UnitEntry{"mT", Dimension::MagneticField, 1.0e-3},
    UnitEntry{"uT", Dimension::MagneticField, 1.0e-6},
    UnitEntry{"G", Dimension::MagneticField, kGauss},
    UnitEntry{"gauss", Dimension::MagneticField, kGauss},

    UnitEntry{"T/m", Dimension::FieldGradient, 1.0},
    UnitEntry{"T/cm", Dimension::FieldGradient, 1.0e2},
    UnitEntry{"T/mm", Dimension::FieldGradient, 1.0e3},
    UnitEntry{"G/cm", Dimension::FieldGradient, kGauss * 1.0e2},

    UnitEntry{"1/s", Dimension::Rate, 1.0},
    UnitEntry{"/s", Dimension::Rate, 1.0},
    UnitEntry{"Hz", Dimension::Rate, 1.0},
    UnitEntry{"1/ms", Dimension::Rate, 1.0e3},
    UnitEntry{"1/us", Dimension::Rate, 1.0e6},

    UnitEntry{"rad", Dimension::Angle, 1.0},
    UnitEntry{"deg", Dimension::Angle, kPi / 180.0},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_factor(std::string_view token, std::string_view whole) {
  if (token == "pi") return kPi;
  if (token == "-pi") return -kPi;
  double v = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw DomainError("malformed number '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Dimensionless: return "dimensionless";
    case Dimension::Length: return "length";
    case Dimension::Mass: return "mass";
    case Dimension::Time: return "time";
    case Dimension::Energy: return "energy";
    case Dimension::Speed: return "speed";
    case Dimension::MagneticField: return "magnetic field";
    case Dimension::FieldGradient: return "field gradient";
    case Dimension::Rate: return "rate";
    case Dimension::Angle: return "angle";
  }
  return "unknown";
}

std::string_view si_symbol(Dimension d) {
  switch (d) {
    case Dimension::Dimensionless: return "";
    case Dimension::Length: return "m";
    case Dimension::Mass: return "kg";
    case Dimension::Time: return "s";
    case Dimension::Energy: return "J";
    case Dimension::Speed: return "m/s";
    case Dimension::MagneticField: return "T";
    case Dimension::FieldGradient: return "T/m";
    case Dimension::Rate: return "1/s";
    case Dimension::Angle: return "rad";
  }
  return "";
}

double parse_number_expression(std::string_view text) {
  const std::string_view expr = trim(text);
  if (expr.empty()) throw DomainError("empty number");
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= expr.size(); ++i) {
    const bool at_end = i == expr.size();
    const bool is_op = !at_end && (expr[i] == '*' || expr[i] == '/');
    if (!at_end && !is_op) continue;
    const double f = parse_factor(expr.substr(start, i - start), expr);
    if (op == '*') {
      value *= f;
    } else {
      if (f == 0.0) throw DomainError("division by zero in '" + std::string(expr) + "'");
      value /= f;
    }
    if (!at_end) op = expr[i];
    start = i + 1;
  }
  return value;
}

Quantity parse_quantity(std::string_view text) {
  const std::string_view s = trim(text);
  const auto space = s.find_first_of(" \t");
  if (space == std::string_view::npos) {
    throw DomainError("missing unit in '" + std::string(s) + "'");
  }
  const double number = parse_number_expression(s.substr(0, space));
  const std::string_view unit = trim(s.substr(space));
  for (const auto& entry : kUnits) {
    if (entry.symbol == unit) return {number * entry.scale, entry.dimension};
  }
  throw DomainError("unknown unit '" + std::string(unit) + "'");
}

double parse_quantity_as(std::string_view text, Dimension expected) {
  if (expected == Dimension::Dimensionless) return parse_number_expression(text);
  const Quantity q = parse_quantity(text);
  if (q.dimension != expected) {
    throw DomainError("expected a " + std::string(dimension_name(expected)) + " but got a " +
                      std::string(dimension_name(q.dimension)) + " in '" +
                      std::string(trim(text)) + "'");
  }
  return q.value;
}

std::string format_quantity(double si_value, Dimension d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", si_value);
  std::string out(buf);
  if (d != Dimension::Dimensionless) {
    out += ' ';
    out += si_symbol(d);
  }
  return out;
}

}  // namespace qratio
