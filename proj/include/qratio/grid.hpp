#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qratio/fft.hpp"
#include "qratio/gaussian_packet.hpp"
#include "qratio/numeric.hpp"

namespace qratio::grid {

// Uniform periodic grid centred on the origin. Axis 0 is the slow index of the
// row-major layout; a 1D grid has points[1] == 1.
struct Grid {
  int dims = 1;
  std::array<std::size_t, 2> points{64, 1};
  std::array<double, 2> extent{1.0, 0.0};

  static Grid line(double extent, std::size_t points);
  static Grid plane(double extent0, std::size_t points0, double extent1, std::size_t points1);

  // Throws ResolutionError unless every axis has a power-of-two count >= 64.
  void validate() const;

  std::size_t size() const { return points[0] * points[1]; }
  double spacing(int axis) const { return extent[axis] / static_cast<double>(points[axis]); }
  double cell_volume() const { return dims == 1 ? spacing(0) : spacing(0) * spacing(1); }
  double coord(int axis, std::size_t i) const {
    return -0.5 * extent[axis] + static_cast<double>(i) * spacing(axis);
  }
  // Angular wavenumber of FFT bin i (negative frequencies in the upper half).
  double wavenumber(int axis, std::size_t i) const;
  double max_wavenumber(int axis) const;
  std::vector<double> coords(int axis) const;

  bool operator==(const Grid&) const = default;
};

struct WaveField {
  Grid grid;
  ComplexBuffer psi;
  double mass = 1.0;
  double time = 0.0;

  double norm() const;  // sum |psi|^2 dV
};

struct Free {};
struct Linear {
  double slope = 0.0;  // V = slope * coordinate, J/m
  int axis = 0;
};
struct Barrier {
  std::vector<double> profile;  // V along `axis`, one sample per grid point
  int axis = 0;
};
struct Mask {
  std::vector<cplx> multiplier;  // applied once per step, full grid
};
struct Custom {
  std::vector<double> samples;  // V on the full grid
};

class PotentialSpec {
 public:
  using Kind = std::variant<Free, Linear, Barrier, Mask, Custom>;

  PotentialSpec() = default;
  PotentialSpec(Kind k) : kind_(std::move(k)) {}

  static PotentialSpec free() { return {Free{}}; }
  static PotentialSpec linear(double slope, int axis = 0) { return {Linear{slope, axis}}; }

  const Kind& kind() const { return kind_; }
  bool is_real() const { return !std::holds_alternative<Mask>(kind_); }

  // Checks sample counts and finiteness against the grid.
  void validate(const Grid& g) const;
  // Real potential at flat index idx (0 for masks).
  double value(const Grid& g, std::size_t idx) const;
  // dV/dx_axis at flat index idx (central differences for sampled kinds).
  double gradient(const Grid& g, std::size_t idx, int axis) const;
  double max_abs(const Grid& g) const;

 private:
  Kind kind_{Free{}};
};

// Builds a normalized product Gaussian, one packet per axis. Throws
// ResolutionError when a width is below 4 spacings, when the 3-width support
// comes closer than 8 spacings to the boundary, or when the momentum content
// exceeds the grid bandwidth.
WaveField initialize_gaussian(const Grid& grid, std::span<const GaussianPacket> packets);

// Unnormalized 1D Gaussian samples exp(-(x-c)^2/a^2 + i p x / hbar).
std::vector<cplx> gaussian_samples(const Grid& grid, int axis, const GaussianPacket& packet);

// Largest kinetic eigenvalue on the grid, sum over axes of hbar^2 k_max^2 / 2m.
double max_kinetic_energy(const Grid& grid, double mass);

// dt = 0.1 hbar / (max|V| + max kinetic energy).
double suggest_dt(const Grid& grid, double mass, const PotentialSpec& potential);

// exp(-i hbar k^2 dt / 2m) / N on the FFT bins, N = grid.size().
ComplexBuffer kinetic_phase(const Grid& grid, double mass, double dt);

// One Strang step (half potential, spectral kinetic, half potential) applied
// to `batch` contiguous fields on the same grid.
class SplitStep {
 public:
  SplitStep(const Grid& grid, double mass, const PotentialSpec& potential, double dt,
            std::size_t batch = 1);
  void step(std::span<cplx> data) const;
  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  double dt_;
  std::size_t batch_;
  FftPlan plan_;
  ComplexBuffer half_potential_;
  ComplexBuffer kinetic_;
  std::vector<cplx> mask_;
};

struct Snapshot {
  std::array<double, 2> mean_position{};
  std::array<double, 2> mean_momentum{};
  std::array<double, 2> widths{};  // 1/e half-width of |psi|^2: sqrt(2) * stddev
};

Snapshot observables(const WaveField& field);

// <-dV/dx_axis> by quadrature over |psi|^2.
std::array<double, 2> mean_force(const WaveField& field, const PotentialSpec& potential);

struct ObservableTrace {
  std::vector<double> times;
  std::vector<std::array<double, 2>> mean_position;
  std::vector<std::array<double, 2>> mean_momentum;
  std::vector<std::array<double, 2>> widths;
  std::vector<std::array<double, 2>> mean_force;
  int dims = 1;

  void record(const WaveField& field, const PotentialSpec& potential);
  std::size_t size() const { return times.size(); }
};

struct EhrenfestResidual {
  double position = 0.0;  // max |d<x>/dt - <p>/m| relative
  double momentum = 0.0;  // max |d<p>/dt - <-grad V>| relative
};

// Central differences on a uniformly sampled trace; needs at least 3 records.
EhrenfestResidual ehrenfest_residual(const ObservableTrace& trace, double mass);

struct PropagationOptions {
  bool monitor_boundary = true;
  double boundary_margin = 0.05;      // fraction of each axis
  double boundary_tolerance = 1e-6;   // probability allowed in the margin
  std::size_t record_every = 0;       // 0: no trace
};

struct PropagationStats {
  double max_norm_drift_per_step = 0.0;
  double total_norm_drift = 0.0;
  std::size_t steps = 0;
};

// Probability within the outer `margin` fraction of any axis.
double boundary_probability(const WaveField& field, double margin);
double boundary_probability(const Grid& grid, std::span<const cplx> psi, double margin);

// sum |psi|^2 dV for samples on `grid`.
double norm_of(const Grid& grid, std::span<const cplx> psi);

// Advances `field` by steps * dt. Throws StepSizeError if dt * E_kin,max / hbar
// >= pi/4 and BoundaryError when probability reaches the boundary margin.
WaveField propagate(WaveField field, const PotentialSpec& potential, double dt, std::size_t steps,
                    const PropagationOptions& options = {}, PropagationStats* stats = nullptr,
                    ObservableTrace* trace = nullptr);

// The precondition check used by propagate().
void check_time_step(const Grid& grid, double mass, const PotentialSpec& potential, double dt);

double l2_distance(const WaveField& a, const WaveField& b);

}  // namespace qratio::grid
