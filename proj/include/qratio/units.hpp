#pragma once

#include <string>
#include <string_view>

namespace qratio {

enum class Dimension {
  Dimensionless,
  Length,
  Mass,
  Time,
  Energy,
  Speed,
  MagneticField,
  FieldGradient,
  Rate,
  Angle,
};

std::string_view dimension_name(Dimension d);

// SI unit symbol used when serializing a quantity of dimension d.
std::string_view si_symbol(Dimension d);

struct Quantity {
  double value;  // SI
  Dimension dimension;
};

// Evaluates a small numeric expression: products and quotients of decimal
// numbers and the constant `pi`, e.g. "13/2", "pi/4", "2*pi", "1.5e-3".
double parse_number_expression(std::string_view text);

// Parses "<expr> <unit>" into SI. Throws DomainError on an unknown unit and on
// a missing unit.
Quantity parse_quantity(std::string_view text);

// Parses a quantity and checks it has the expected dimension. Dimensionless
// values are plain number expressions without a unit.
double parse_quantity_as(std::string_view text, Dimension expected);

// Exact round-trip text for an SI value ("%.17g <symbol>").
std::string format_quantity(double si_value, Dimension d);

}  // namespace qratio
