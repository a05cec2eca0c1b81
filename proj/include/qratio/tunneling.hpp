#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "qratio/decoherence.hpp"
#include "qratio/gaussian_packet.hpp"
#include "qratio/grid.hpp"

namespace qratio::tunnel {

struct Rectangular {
  double height = 0.0;      // J
  double half_width = 0.0;  // m
};
// V0 exp(-z^2 / 2 sigma^2), truncated to zero beyond kGaussianCut sigma.
struct GaussianBarrier {
  double height = 0.0;
  double sigma = 0.0;
};
// Linear interpolation between samples, zero outside [z.front(), z.back()].
struct Sampled {
  std::vector<double> z;
  std::vector<double> V;
};

inline constexpr double kGaussianCut = 8.0;

class BarrierSpec {
 public:
  using Kind = std::variant<Rectangular, GaussianBarrier, Sampled>;

  BarrierSpec() = default;
  BarrierSpec(Kind k) : kind_(std::move(k)) { validate(); }

  const Kind& kind() const { return kind_; }
  // Throws DomainError for non-positive sizes, non-finite or negative values,
  // or non-increasing sample positions.
  void validate() const;
  double value(double z) const;
  double max_value() const;
  // Support [lo, hi]; V = 0 outside.
  std::array<double, 2> support() const;
  // a with the support inside [-a, a].
  double half_extent() const;

 private:
  Kind kind_{Rectangular{}};
};

struct TurningPoints {
  bool forbidden = false;  // false when E >= max V
  double left = 0.0;
  double right = 0.0;
};

// Outermost roots of V(z) = E by bracketing bisection; rectangular barriers
// return their edges.
TurningPoints turning_points(const BarrierSpec& barrier, double energy);

// exp(-2 integral sqrt(2m(V - E)) / hbar dz) between the turning points; 1 when
// there is no forbidden region.
double wkb_transmission(const BarrierSpec& barrier, double energy, double mass);

struct ExactTransmission {
  double value = 0.0;
  std::size_t slices = 0;
  double last_change = 0.0;  // relative change on the final doubling
};

inline constexpr std::size_t kMinSlices = 1024;
inline constexpr std::size_t kMaxSlices = std::size_t{1} << 22;
inline constexpr double kSliceTolerance = 1e-8;

// Transfer matrix over piecewise-constant slices, doubled from kMinSlices
// until the relative change drops below kSliceTolerance. Throws
// ConvergenceError past kMaxSlices.
ExactTransmission exact_transmission_detail(const BarrierSpec& barrier, double energy, double mass);
double exact_transmission(const BarrierSpec& barrier, double energy, double mass);

// Transfer-matrix transmission with a fixed slice count.
double sliced_transmission(const BarrierSpec& barrier, double energy, double mass, std::size_t slices);

// Exact transmission averaged over the momentum distribution of a
// longitudinal packet, weight exp(-(k - k0)^2 w^2 / 2) restricted to k > 0.
double energy_averaged_transmission(const BarrierSpec& barrier, const GaussianPacket& longitudinal);

// (x, z) plane: axis 0 transverse, axis 1 along the beam. The barrier depends
// on z only.
struct TunnelScenario {
  GaussianPacket longitudinal;               // along z, momentum p0 > 0
  std::array<GaussianPacket, 2> transverse;  // along x, psi_1 and psi_2
  cplx c1{1.0, 0.0};
  cplx c2{0.0, 0.0};
  BarrierSpec barrier;
  grid::Grid grid;
  double dt = 0.0;
  std::size_t max_steps = 0;
  std::size_t check_every = 50;

  // Amplitudes, masses, packet separation (> 3 widths) and grid layout.
  void validate() const;
  double energy() const;  // p0^2 / 2m
};

struct TunnelReport {
  bool tunneling_regime = true;  // E < max V
  bool decohered = false;
  double energy = 0.0;
  double elapsed = 0.0;
  std::size_t steps = 0;
  double transmitted = 0.0;  // P(z > a)
  double reflected = 0.0;    // P(z < -a)
  double expected_transmission = 0.0;  // energy-averaged exact
  double central_transmission = 0.0;   // exact at p0
  double wkb_central = 0.0;
  double input_visibility = 0.0;
  double output_visibility = 0.0;  // 2|rho_12| / (rho_11 + rho_22)
  double coherence = 0.0;          // transverse, at the packet centres
  std::array<double, 2> weights{};  // transmitted weight on each side of the midpoint
  std::optional<double> factorization_error;  // pure mode only
  std::vector<double> transverse_density;     // right of the barrier, normalized
  std::vector<double> density;                // |psi(x, z)|^2 on the grid at the end
};

// Propagates until the transmitted lobe's mean passes a + 4w and the barrier
// region holds less than kBarrierResidual. Decohered mode damps the
// transverse density matrix for 5 / Lambda before propagation and keeps the
// environment on during it; the longitudinal motion stays pure.
TunnelReport run_tunnel_scenario(const TunnelScenario& scenario, bool with_decoherence,
                                 const std::optional<decoherence::EnvironmentSpec>& env);

inline constexpr double kBarrierResidual = 1e-7;

}  // namespace qratio::tunnel
