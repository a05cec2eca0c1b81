#include "qratio/decoherence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"

namespace qratio::decoherence {

using grid::Grid;
using grid::PotentialSpec;
using grid::SplitStep;

namespace {

void check_grid(const Grid& g) {
  g.validate();
  if (g.dims != 1) throw DomainError("density matrices live on 1D grids");
  if (g.points[0] > kMaxDensityPoints) {
    throw ResolutionError("density matrix grids are capped at " + std::to_string(kMaxDensityPoints) + " points");
  }
}

void transpose(ComplexBuffer& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) std::swap(m[i * n + j], m[j * n + i]);
  }
}

void conjugate(ComplexBuffer& m) {
  for (auto& v : m) v = std::conj(v);
}

// A <- U_left A U_right^dagger, using only row-wise applications of U:
// rows(M) = M U^T, so rows(A^T)^T = U A and conj(rows(conj(B))) = B U^dagger.
void sandwich(ComplexBuffer& a, std::size_t n, const SplitStep* left, const SplitStep* right) {
  if (left != nullptr) {
    transpose(a, n);
    left->step(a);
    transpose(a, n);
  }
  if (right != nullptr) {
    conjugate(a);
    right->step(a);
    conjugate(a);
  }
}

std::vector<double> damping_kernel(const Grid& g, const EnvironmentSpec& env, double t) {
  const std::size_t n = g.points[0];
  const double dx = g.spacing(0);
  // F depends only on |i - j|
  std::vector<double> by_offset(n);
  for (std::size_t d = 0; d < n; ++d) by_offset[d] = std::exp(-localization_rate(env, d * dx) * t);
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i * n + j] = by_offset[i > j ? i - j : j - i];
  }
  return k;
}

std::size_t nearest_index(const Grid& g, double x) {
  const double idx = std::round((x - g.coord(0, 0)) / g.spacing(0));
  if (idx < 0.0 || idx >= static_cast<double>(g.points[0])) throw DomainError("position lies outside the grid");
  return static_cast<std::size_t>(idx);
}

}  // namespace

double DensityMatrix::trace() const {
  const std::size_t m = n();
  return grid.spacing(0) * pairwise_sum_of(m, [&](std::size_t i) { return rho[i * m + i].real(); });
}

double DensityMatrix::purity() const {
  const std::size_t m = n();
  const double dx = grid.spacing(0);
  // tr(rho^2) = sum |rho_ij|^2 dx^2 for Hermitian rho
  return dx * dx * pairwise_sum_of(m * m, [&](std::size_t i) { return std::norm(rho[i]); });
}

double DensityMatrix::hermiticity_defect() const {
  const std::size_t m = n();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) worst = std::max(worst, std::abs(rho[i * m + j] - std::conj(rho[j * m + i])));
  }
  return worst;
}

std::vector<double> DensityMatrix::diagonal() const {
  const std::size_t m = n();
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = rho[i * m + i].real();
  return d;
}

void EnvironmentSpec::validate() const {
  if (!(lambda_env > 0.0) || !(rate_Lambda > 0.0)) {
    throw DomainError("environment wavelength and rate must be > 0");
  }
}

double localization_rate(const EnvironmentSpec& env, double separation) {
  const double u = separation / env.lambda_env;
  return env.rate_Lambda * -std::expm1(-u * u);
}

DensityMatrix pure_to_density(const grid::WaveField& field) {
  check_grid(field.grid);
  DensityMatrix d;
  d.grid = field.grid;
  d.mass = field.mass;
  d.time = field.time;
  const std::size_t n = d.n();
  d.rho.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d.rho[i * n + j] = field.psi[i] * std::conj(field.psi[j]);
  }
  return d;
}

Decoherer::Decoherer(const Grid& grid, double mass, const EnvironmentSpec& env,
                     const std::optional<PotentialSpec>& potential, double dt)
    : grid_(grid), dt_(dt) {
  check_grid(grid);
  env.validate();
  if (potential) {
    grid::check_time_step(grid, mass, *potential, dt);
    if (!potential->is_real()) throw DomainError("density evolution needs a real potential");
    unitary_.emplace(grid, mass, *potential, dt, grid.points[0]);
  }
  kernel_ = damping_kernel(grid, env, std::abs(dt));
}

void Decoherer::step_block(ComplexBuffer& block, const SplitStep* left, const SplitStep* right) const {
  const std::size_t n = grid_.points[0];
  sandwich(block, n, left, right);
  for (std::size_t i = 0; i < n * n; ++i) block[i] *= kernel_[i];
}

void Decoherer::step(DensityMatrix& rho) const {
  const std::size_t n = rho.n();
  const SplitStep* u = propagator();
  step_block(rho.rho, u, u);
  if (u != nullptr) {
    // restore exact Hermiticity after the two one-sided passes
    for (std::size_t i = 0; i < n; ++i) {
      rho.rho[i * n + i] = rho.rho[i * n + i].real();
      for (std::size_t j = i + 1; j < n; ++j) {
        const cplx avg = 0.5 * (rho.rho[i * n + j] + std::conj(rho.rho[j * n + i]));
        rho.rho[i * n + j] = avg;
        rho.rho[j * n + i] = std::conj(avg);
      }
    }
  }
  rho.time += dt_;
}

DensityMatrix decohere_step(const DensityMatrix& rho, const EnvironmentSpec& env,
                            const std::optional<PotentialSpec>& potential, double dt) {
  const Decoherer d(rho.grid, rho.mass, env, potential, dt);
  DensityMatrix out = rho;
  d.step(out);
  return out;
}

DensityMatrix damp(const DensityMatrix& rho, const EnvironmentSpec& env, double t) {
  check_grid(rho.grid);
  env.validate();
  if (t < 0.0) throw DomainError("damping time must be >= 0");
  const auto k = damping_kernel(rho.grid, env, t);
  DensityMatrix out = rho;
  for (std::size_t i = 0; i < k.size(); ++i) out.rho[i] *= k[i];
  out.time += t;
  return out;
}

double coherence(const DensityMatrix& rho, double x1, double x2) {
  const std::size_t i = nearest_index(rho.grid, x1);
  const std::size_t j = nearest_index(rho.grid, x2);
  const double d1 = rho.at(i, i).real();
  const double d2 = rho.at(j, j).real();
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("coherence is undefined where the density vanishes");
  return std::abs(rho.at(i, j)) / std::sqrt(d1 * d2);
}

double min_eigenvalue(const DensityMatrix& rho) {
  const std::size_t n = rho.n();
  Eigen::MatrixXcd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          0.5 * (rho.at(i, j) + std::conj(rho.at(j, i))) * rho.grid.spacing(0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue solver failed");
  return solver.eigenvalues().minCoeff();
}

TimescaleReport timescale_report(const TimescaleInputs& in) {
  in.env.validate();
  if (!(in.packet_width > 0.0) || !(in.separation > 0.0) || !(in.transit_length > 0.0) ||
      !(in.transit_speed > 0.0) || !(in.mass > 0.0) || !(in.tau_diss > 0.0)) {
    throw DomainError("timescale report inputs must all be > 0");
  }
  TimescaleReport r;
  r.tau_dec = 1.0 / localization_rate(in.env, in.separation);
  r.tau_trans = in.transit_length / in.transit_speed;
  r.tau_diff = in.mass * in.packet_width * in.packet_width / kHbar;
  r.tau_diss = in.tau_diss;
  const double k = kOrderMargin;
  r.timescales_ordered = k * r.tau_dec <= r.tau_trans && k * r.tau_trans <= r.tau_diff &&
                         k * r.tau_trans <= r.tau_diss;
  r.packets_separated = k * in.packet_width <= in.separation;
  r.wavelength_between = k * in.packet_width <= in.env.lambda_env && k * in.env.lambda_env <= in.separation;
  r.random_motion = r.tau_diss < r.tau_trans;
  if (r.random_motion) {
    r.verdict = "random-motion regime, mixture description unreliable";
  } else if (r.timescales_ordered && r.packets_separated && r.wavelength_between) {
    r.verdict = "mixture reliable";
  } else {
    r.verdict = "ordering violated, mixture description not guaranteed";
  }
  return r;
}

SGDecoherenceReport decohered_sg_scenario(const SGDecoherenceConfig& cfg) {
  check_grid(cfg.grid);
  cfg.env.validate();
  if (cfg.steps < 1 || !(cfg.duration > 0.0)) throw DomainError("scenario needs a positive duration and steps");
  if (std::abs(std::norm(cfg.c_up) + std::norm(cfg.c_down) - 1.0) > 1e-12) {
    throw DomainError("spin amplitudes must satisfy |c_up|^2 + |c_down|^2 = 1");
  }
  const Grid& g = cfg.grid;
  const std::size_t n = g.points[0];
  const double dt = cfg.duration / static_cast<double>(cfg.steps);
  const double mass = cfg.packet.mass;
  const auto psi = grid::initialize_gaussian(g, std::span(&cfg.packet, 1));

  const std::array<PotentialSpec, 2> pots{sg::component_potential(g, cfg.field, 0),
                                          sg::component_potential(g, cfg.field, 1)};
  for (const auto& p : pots) grid::check_time_step(g, mass, p, dt);
  {
    const double kick = kBohrMagneton * std::abs(cfg.field.gradient_b0) * cfg.duration / kHbar;
    const double sigma = std::sqrt(1.0 / (cfg.packet.width * cfg.packet.width) +
                                   2.0 * cfg.env.rate_Lambda * cfg.duration /
                                       (cfg.env.lambda_env * cfg.env.lambda_env));
    const double nyquist = kPi / g.spacing(0);
    if (kick + 4.0 * sigma > nyquist) {
      throw ResolutionError("band momentum " + num(kick + 4.0 * sigma) + " 1/m exceeds the grid limit " +
                            num(nyquist) + " 1/m; refine the grid");
    }
  }
  const SplitStep up(g, mass, pots[0], dt, n);
  const SplitStep down(g, mass, pots[1], dt, n);
  const std::array<const SplitStep*, 2> u{&up, &down};
  const Decoherer damped(g, mass, cfg.env, std::nullopt, dt);

  const std::array<cplx, 2> c{cfg.c_up, cfg.c_down};
  // blocks[a][b] = c_a c_b^* psi psi^dagger
  std::array<std::array<ComplexBuffer, 2>, 2> blocks;
  for (int a = 0; a < 2; ++a) {
    for (int b = a; b < 2; ++b) {
      blocks[a][b].resize(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          blocks[a][b][i * n + j] = c[a] * std::conj(c[b]) * psi.psi[i] * std::conj(psi.psi[j]);
        }
      }
    }
  }
  // pure reference: one field per component
  std::array<grid::WaveField, 2> pure{psi, psi};
  const SplitStep pure_up(g, mass, pots[0], dt);
  const SplitStep pure_down(g, mass, pots[1], dt);
  const std::array<const SplitStep*, 2> u_pure{&pure_up, &pure_down};

  SGDecoherenceReport r;
  r.expected_ratio = std::norm(cfg.c_down) > 0.0 ? std::norm(cfg.c_up) / std::norm(cfg.c_down)
                                                 : std::numeric_limits<double>::infinity();
  const double dx = g.spacing(0);
  auto trace_of = [&] {
    return dx * pairwise_sum_of(n, [&](std::size_t i) {
             return blocks[0][0][i * n + i].real() + blocks[1][1][i * n + i].real();
           });
  };
  auto centres = [&] {
    std::array<double, 2> z{};
    for (int a = 0; a < 2; ++a) {
      const double w = dx * pairwise_sum_of(n, [&](std::size_t i) { return blocks[a][a][i * n + i].real(); });
      z[a] = w > 0.0 ? dx * pairwise_sum_of(n, [&](std::size_t i) {
                         return blocks[a][a][i * n + i].real() * g.coord(0, i);
                       }) / w
                     : 0.0;
    }
    return z;
  };
  auto interband = [&](const std::array<double, 2>& z) {
    const std::size_t i = nearest_index(g, z[0]);
    const std::size_t j = nearest_index(g, z[1]);
    const double d1 = blocks[0][0][i * n + i].real();
    const double d2 = blocks[1][1][j * n + j].real();
    if (!(d1 > 0.0) || !(d2 > 0.0)) return 0.0;
    return std::abs(blocks[0][1][i * n + j]) / std::sqrt(d1 * d2);
  };

  const double trace0 = trace_of();
  for (std::size_t s = 1; s <= cfg.steps; ++s) {
    // rho_downup is the adjoint of rho_updown and is not needed
    for (int a = 0; a < 2; ++a) {
      for (int b = a; b < 2; ++b) {
        if (c[a] == 0.0 || c[b] == 0.0) continue;
        damped.step_block(blocks[a][b], u[a], u[b]);
      }
    }
    for (int a = 0; a < 2; ++a) u_pure[a]->step(pure[a].psi);
    r.max_trace_drift = std::max(r.max_trace_drift, std::abs(trace_of() - trace0));
    if (cfg.record_every > 0 && s % cfg.record_every == 0) {
      r.times.push_back(static_cast<double>(s) * dt);
      r.coherence_trace.push_back(c[0] != 0.0 && c[1] != 0.0 ? interband(centres()) : 0.0);
    }
  }

  // half-space intensities
  std::vector<double> total(n), pure_total(n);
  for (std::size_t i = 0; i < n; ++i) {
    total[i] = blocks[0][0][i * n + i].real() + blocks[1][1][i * n + i].real();
    pure_total[i] = std::norm(c[0]) * std::norm(pure[0].psi[i]) + std::norm(c[1]) * std::norm(pure[1].psi[i]);
  }
  auto half = [&](const std::vector<double>& d, bool upper) {
    return dx * pairwise_sum_of(n, [&](std::size_t i) {
             const double z = g.coord(0, i);
             if (z == 0.0) return 0.5 * d[i];
             return (z > 0.0) == upper ? d[i] : 0.0;
           });
  };
  r.intensities = {half(total, true), half(total, false)};
  r.pure_intensities = {half(pure_total, true), half(pure_total, false)};
  r.band_centres = centres();
  for (int a = 0; a < 2; ++a) {
    r.band_weights[a] = dx * pairwise_sum_of(n, [&](std::size_t i) { return blocks[a][a][i * n + i].real(); });
  }
  r.interband_coherence = c[0] != 0.0 && c[1] != 0.0 ? interband(r.band_centres) : 0.0;

  grid::WaveField diag_field;
  diag_field.grid = g;
  diag_field.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) diag_field.psi[i] = std::sqrt(std::max(0.0, total[i]));
  const double edge = grid::boundary_probability(diag_field, 0.05);
  if (edge >= 1e-6) throw BoundaryError("band probability " + num(edge) + " reached the boundary margin");
  return r;
}

}  // namespace qratio::decoherence
