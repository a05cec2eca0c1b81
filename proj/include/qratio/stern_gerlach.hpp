#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qratio/grid.hpp"

namespace qratio::sg {

// Field B = (0, -b0 y, B0 + b0 z) on a (y, z) plane, or B0 + b0 z along a line.
// The last grid axis is z.
struct SGFieldConfig {
  double B0 = 0.0;           // T
  double gradient_b0 = 0.0;  // T/m
  double region_length = 0.0;  // m
  double transit_speed = 0.0;  // m/s

  // Time spent inside the field region, region_length / transit_speed.
  double transit_time() const;
  void validate() const;
  // Throws DomainError unless |B0| >= 50 |b0 y_max| for the transverse axis
  // of the grid (2D only).
  void check_strong_field(const grid::Grid& g) const;
};

inline constexpr double kStrongFieldRatio = 50.0;

// psi = c_up psi_up |up> + c_down psi_down |down>, with each component
// normalized on its own.
struct SpinorField {
  grid::WaveField up;
  grid::WaveField down;
  cplx c_up{1.0, 0.0};
  cplx c_down{0.0, 0.0};

  void validate() const;
  // |c_a|^2 |psi_a|^2 on the grid.
  std::vector<double> density(int component) const;
};

SpinorField make_spinor(const grid::Grid& g, std::span<const GaussianPacket> packets, cplx c_up,
                        cplx c_down);

inline int z_axis(const grid::Grid& g) { return g.dims - 1; }

// V_up = -mu b0 z and V_down = +mu b0 z with mu the Bohr magneton.
grid::PotentialSpec component_potential(const grid::Grid& g, const SGFieldConfig& config, int component);

struct DecoupledRun {
  SpinorField spinor;
  std::array<grid::ObservableTrace, 2> traces;
  std::array<grid::PropagationStats, 2> stats;
};

// Each component evolves under its own linear potential; the uniform B0 phase
// is removed analytically and never stepped.
DecoupledRun propagate_decoupled(const SpinorField& spinor, const SGFieldConfig& config, double dt,
                                 std::size_t steps, const grid::PropagationOptions& options = {});

// Largest dt accepted by propagate_coupled: hbar / (20 mu_B |B0|).
double max_coupled_dt(const SGFieldConfig& config);

struct CoupledRun {
  SpinorField spinor;
  std::array<double, 2> populations{};  // final |c_up|^2, |c_down|^2
  double max_population_change = 0.0;   // over all steps, relative to the start
  double max_norm_drift_per_step = 0.0;
};

// Full two-component evolution on a (y, z) plane with the pointwise 2x2
// potential -mu_B sigma.B, exponentiated exactly at each point. Throws
// StepSizeError when dt exceeds max_coupled_dt(config).
CoupledRun propagate_coupled(const SpinorField& spinor, const SGFieldConfig& config, double dt,
                             std::size_t steps, const grid::PropagationOptions& options = {});

// sum over components of the L1 distance between the densities |c_a psi_a|^2.
double density_l1_distance(const SpinorField& a, const SpinorField& b);

// 2 mu_B B0 / hbar.
double precession_frequency(double B0);

// Closed-form separation between the two bands of a spin-1/2 particle after
// the field region and a field-free drift:
// 2 (mu b0 tau^2 / 2m + mu b0 tau / m * t_drift), tau the transit time.
double band_separation(const SGFieldConfig& config, double mass, double moment, double drift_time);

struct Band {
  double m = 0.0;       // J_z eigenvalue
  double z = 0.0;       // deflection, m
  double weight = 0.0;  // |c_k|^2
};

// Deflection of every J_z band of a spin-j coherent state. Band m feels the
// force (m / j) top_moment b0, so z_m = (m / j) half the separation of the
// top band. Weights come from the spin-coherent distribution.
std::vector<Band> large_spin_bands(double j, double theta, double phi, const SGFieldConfig& config,
                                   double drift_time, double mass, double top_moment);

}  // namespace qratio::sg
