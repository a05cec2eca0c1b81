#pragma once

#include <span>
#include <string_view>

namespace qratio {

enum class Regime { Quantum, Classical, Crossover, Infinite };

std::string_view regime_name(Regime r);

struct QuantumRatio {
  double value;  // +inf for point-like bodies
  Regime regime;
};

// Classification thresholds: Quantum iff Q > 10, Classical iff Q <= 1.
inline constexpr double kQuantumThreshold = 10.0;
inline constexpr double kClassicalThreshold = 1.0;

// Q = R_q / L_0 for a centre-of-mass spread R_q and a body size L_0. A body of
// zero size (elementary particle) has Q = inf.
QuantumRatio quantum_ratio(double quantum_range, double body_size);

// Body size as the largest rms constituent displacement from the centre of mass.
double body_size(std::span<const double> rms_spreads);

}  // namespace qratio
