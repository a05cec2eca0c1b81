#include "qratio/quantum_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qratio/error.hpp"

namespace qratio {

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Quantum: return "Quantum";
    case Regime::Classical: return "Classical";
    case Regime::Crossover: return "Crossover";
    case Regime::Infinite: return "Infinite";
  }
  return "unknown";
}

QuantumRatio quantum_ratio(double quantum_range, double body_size) {
  if (!(quantum_range > 0.0) || !std::isfinite(quantum_range)) {
    throw DomainError("quantum fluctuation range must be positive and finite");
  }
  if (!(body_size >= 0.0) || !std::isfinite(body_size)) {
    throw DomainError("body size must be non-negative and finite");
  }
  if (body_size == 0.0) {
    return {std::numeric_limits<double>::infinity(), Regime::Infinite};
  }
  const double q = quantum_range / body_size;
  Regime regime = Regime::Crossover;
  if (q > kQuantumThreshold) {
    regime = Regime::Quantum;
  } else if (q <= kClassicalThreshold) {
    regime = Regime::Classical;
  }
  return {q, regime};
}

double body_size(std::span<const double> rms_spreads) {
  if (rms_spreads.empty()) throw DomainError("body_size needs at least one constituent");
  for (double r : rms_spreads) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("constituent spread must be >= 0");
  }
  return *std::max_element(rms_spreads.begin(), rms_spreads.end());
}

}  // namespace qratio
