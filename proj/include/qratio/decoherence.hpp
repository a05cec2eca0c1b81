#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qratio/grid.hpp"
#include "qratio/stern_gerlach.hpp"

namespace qratio::decoherence {

// rho(x, x') on a 1D grid, row-major with x the row index.
struct DensityMatrix {
  grid::Grid grid;
  ComplexBuffer rho;
  double mass = 1.0;
  double time = 0.0;

  std::size_t n() const { return grid.points[0]; }
  cplx at(std::size_t i, std::size_t j) const { return rho[i * n() + j]; }
  double trace() const;                   // sum rho(x, x) dx
  double purity() const;                  // tr(rho^2)
  double hermiticity_defect() const;      // max |rho - rho^dagger|
  std::vector<double> diagonal() const;   // rho(x, x)
};

inline constexpr std::size_t kMaxDensityPoints = 1024;

// Localization by an environment of wavelength lambda at saturated rate Lambda.
struct EnvironmentSpec {
  double lambda_env = 1.0;   // m
  double rate_Lambda = 1.0;  // 1/s
  void validate() const;
};

// F(d) = Lambda (1 - exp(-d^2 / lambda^2)).
double localization_rate(const EnvironmentSpec& env, double separation);

// rho = psi psi^dagger for a normalized 1D field.
DensityMatrix pure_to_density(const grid::WaveField& field);

// One Trotter step: rho <- U rho U^dagger (skipped when `potential` is empty,
// i.e. no Hamiltonian), then rho(x, x') *= exp(-F(|x - x'|) dt).
DensityMatrix decohere_step(const DensityMatrix& rho, const EnvironmentSpec& env,
                            const std::optional<grid::PotentialSpec>& potential, double dt);

// Repeated steps sharing one propagator; calls `observe` after each step when set.
class Decoherer {
 public:
  Decoherer(const grid::Grid& grid, double mass, const EnvironmentSpec& env,
            const std::optional<grid::PotentialSpec>& potential, double dt);
  void step(DensityMatrix& rho) const;
  // U_left block U_right^dagger followed by damping, for a block of a
  // spin-resolved density matrix. Either propagator may be null.
  void step_block(ComplexBuffer& block, const grid::SplitStep* left, const grid::SplitStep* right) const;
  const grid::SplitStep* propagator() const { return unitary_ ? &*unitary_ : nullptr; }
  double dt() const { return dt_; }

 private:
  grid::Grid grid_;
  double dt_;
  std::optional<grid::SplitStep> unitary_;
  std::vector<double> kernel_;  // exp(-F dt), n x n
};

// Applies the damping kernel for total time t with no Hamiltonian (closed form).
DensityMatrix damp(const DensityMatrix& rho, const EnvironmentSpec& env, double t);

// |rho(x1, x2)| / sqrt(rho(x1, x1) rho(x2, x2)) at the grid points nearest x1
// and x2. Throws DomainError when a diagonal entry vanishes.
double coherence(const DensityMatrix& rho, double x1, double x2);

// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const DensityMatrix& rho);

struct TimescaleInputs {
  double packet_width = 0.0;  // a
  double separation = 0.0;    // |r1 - r2|
  EnvironmentSpec env;
  double transit_length = 0.0;
  double transit_speed = 0.0;
  double mass = 0.0;
  double tau_diss = 0.0;      // supplied, not derived
};

struct TimescaleReport {
  double tau_dec = 0.0;
  double tau_trans = 0.0;
  double tau_diff = 0.0;
  double tau_diss = 0.0;
  bool timescales_ordered = false;   // tau_dec << tau_trans << tau_diff, tau_diss
  bool packets_separated = false;    // separation >> a
  bool wavelength_between = false;   // a << lambda << separation
  bool random_motion = false;        // tau_diss < tau_trans
  std::string verdict;
};

inline constexpr double kOrderMargin = 10.0;

TimescaleReport timescale_report(const TimescaleInputs& in);

struct SGDecoherenceConfig {
  grid::Grid grid;           // 1D, along z
  GaussianPacket packet;     // initial spatial packet (same for both spins)
  cplx c_up{1.0, 0.0};
  cplx c_down{0.0, 0.0};
  sg::SGFieldConfig field;
  EnvironmentSpec env;
  double duration = 0.0;
  std::size_t steps = 0;
  std::size_t record_every = 0;  // coherence samples, 0: only the end
};

struct SGDecoherenceReport {
  std::array<double, 2> intensities{};       // P(z > 0), P(z < 0) with damping
  std::array<double, 2> pure_intensities{};  // same without environment
  std::array<double, 2> band_weights{};      // tr rho_upup, tr rho_downdown
  double expected_ratio = 0.0;               // |c_up|^2 / |c_down|^2
  double interband_coherence = 0.0;          // at the band centres, end of run
  double max_trace_drift = 0.0;
  std::array<double, 2> band_centres{};
  std::vector<double> times;
  std::vector<double> coherence_trace;
};

// Spin-1/2 particle in the decoupled field with position damping acting on all
// four spin blocks, rho_ab -> U_a rho_ab U_b^dagger. Band intensities are the
// half-space probabilities of rho_upup + rho_downdown. Throws ResolutionError
// when the final momentum spread (deflection plus 4 sigma, including the
// environmental diffusion 2 Lambda t / lambda^2) exceeds the grid Nyquist limit.
SGDecoherenceReport decohered_sg_scenario(const SGDecoherenceConfig& config);

}  // namespace qratio::decoherence
