#include "qratio/stern_gerlach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/spin_coherent.hpp"

namespace qratio::sg {

using grid::Grid;
using grid::PotentialSpec;
using grid::WaveField;

double SGFieldConfig::transit_time() const {
  if (!(region_length > 0.0) || !(transit_speed > 0.0)) {
    throw DomainError("transit time needs positive region length and speed");
  }
  return region_length / transit_speed;
}

void SGFieldConfig::validate() const {
  if (!std::isfinite(B0) || !std::isfinite(gradient_b0)) throw DomainError("field values must be finite");
  if (region_length < 0.0 || transit_speed < 0.0) throw DomainError("region length and speed must be >= 0");
}

void SGFieldConfig::check_strong_field(const Grid& g) const {
  if (g.dims != 2) return;
  const double y_max = 0.5 * g.extent[0];
  if (std::abs(B0) < kStrongFieldRatio * std::abs(gradient_b0 * y_max)) {
    throw DomainError("|B0| = " + num(std::abs(B0)) + " T is below " +
                      num(kStrongFieldRatio) + " |b0 y_max| = " +
                      num(kStrongFieldRatio * std::abs(gradient_b0 * y_max)) + " T");
  }
}

void SpinorField::validate() const {
  if (!(up.grid == down.grid)) throw DomainError("spinor components must share a grid");
  if (std::abs(std::norm(c_up) + std::norm(c_down) - 1.0) > 1e-12) {
    throw DomainError("spinor amplitudes must satisfy |c_up|^2 + |c_down|^2 = 1");
  }
}

std::vector<double> SpinorField::density(int component) const {
  const WaveField& f = component == 0 ? up : down;
  const double w = std::norm(component == 0 ? c_up : c_down);
  std::vector<double> out(f.psi.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * std::norm(f.psi[i]);
  return out;
}

SpinorField make_spinor(const Grid& g, std::span<const GaussianPacket> packets, cplx c_up, cplx c_down) {
  SpinorField s;
  s.up = grid::initialize_gaussian(g, packets);
  s.down = s.up;
  s.c_up = c_up;
  s.c_down = c_down;
  s.validate();
  return s;
}

PotentialSpec component_potential(const Grid& g, const SGFieldConfig& config, int component) {
  const double sign = component == 0 ? -1.0 : 1.0;
  return PotentialSpec::linear(sign * kBohrMagneton * config.gradient_b0, z_axis(g));
}

DecoupledRun propagate_decoupled(const SpinorField& spinor, const SGFieldConfig& config, double dt,
                                 std::size_t steps, const grid::PropagationOptions& options) {
  spinor.validate();
  config.validate();
  DecoupledRun run;
  run.spinor = spinor;
  run.spinor.up = grid::propagate(spinor.up, component_potential(spinor.up.grid, config, 0), dt, steps, options,
                                  &run.stats[0], &run.traces[0]);
  run.spinor.down = grid::propagate(spinor.down, component_potential(spinor.down.grid, config, 1), dt, steps,
                                    options, &run.stats[1], &run.traces[1]);
  return run;
}

double max_coupled_dt(const SGFieldConfig& config) {
  if (config.B0 == 0.0) return std::numeric_limits<double>::infinity();
  return kHbar / (20.0 * kBohrMagneton * std::abs(config.B0));
}

CoupledRun propagate_coupled(const SpinorField& spinor, const SGFieldConfig& config, double dt,
                             std::size_t steps, const grid::PropagationOptions& options) {
  spinor.validate();
  config.validate();
  const Grid& g = spinor.up.grid;
  if (g.dims != 2) throw DomainError("coupled evolution needs a (y, z) plane");
  config.check_strong_field(g);
  if (steps < 1) throw DomainError("propagate_coupled needs at least one step");
  const double limit = max_coupled_dt(config);
  if (!(std::abs(dt) <= limit)) {
    throw StepSizeError("time step " + num(dt) + " s does not resolve the spin precession; need |dt| <= " +
                            num(limit) + " s",
                        limit);
  }
  grid::check_time_step(g, spinor.up.mass, PotentialSpec::free(), dt);

  const std::size_t n = g.size();
  // exp(-i V dt / 2 hbar) with V = -mu_B (Bz sigma_z + By sigma_y) is
  // cos(w) + i sin(w) (nz sigma_z + ny sigma_y), w = mu_B |B| dt / 2 hbar:
  //   [[c + i s nz, s ny], [-s ny, c - i s nz]]
  std::vector<cplx> diag(n);
  std::vector<double> offd(n);
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    const double y = g.coord(0, i);
    for (std::size_t j = 0; j < g.points[1]; ++j) {
      const double z = g.coord(1, j);
      const double bz = config.B0 + config.gradient_b0 * z;
      const double by = -config.gradient_b0 * y;
      const double b = std::hypot(bz, by);
      const double w = kBohrMagneton * b * dt / (2.0 * kHbar);
      const double c = std::cos(w), s = std::sin(w);
      const double nz = b > 0.0 ? bz / b : 1.0;
      const double ny = b > 0.0 ? by / b : 0.0;
      diag[i * g.points[1] + j] = {c, s * nz};
      offd[i * g.points[1] + j] = s * ny;
    }
  }
  const ComplexBuffer kinetic = grid::kinetic_phase(g, spinor.up.mass, dt);
  const FftPlan plan(g.points[0], g.points[1], 2);

  ComplexBuffer data(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = spinor.c_up * spinor.up.psi[i];
    data[n + i] = spinor.c_down * spinor.down.psi[i];
  }
  auto rotate = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx u = data[i], d = data[n + i];
      data[i] = diag[i] * u + offd[i] * d;
      data[n + i] = -offd[i] * u + std::conj(diag[i]) * d;
    }
  };
  const std::span<const cplx> up_view(data.data(), n), down_view(data.data() + n, n);
  const double pop0 = grid::norm_of(g, up_view);
  double total = pop0 + grid::norm_of(g, down_view);

  CoupledRun run;
  for (std::size_t step = 0; step < steps; ++step) {
    rotate();
    plan.forward(data);
    for (std::size_t i = 0; i < n; ++i) {
      data[i] *= kinetic[i];
      data[n + i] *= kinetic[i];
    }
    plan.inverse(data);
    rotate();
    const double pu = grid::norm_of(g, up_view);
    const double next = pu + grid::norm_of(g, down_view);
    run.max_norm_drift_per_step = std::max(run.max_norm_drift_per_step, std::abs(next - total));
    run.max_population_change = std::max(run.max_population_change, std::abs(pu - pop0));
    total = next;
    if (options.monitor_boundary) {
      const double edge = grid::boundary_probability(g, up_view, options.boundary_margin) +
                          grid::boundary_probability(g, down_view, options.boundary_margin);
      if (edge >= options.boundary_tolerance) {
        throw BoundaryError("spinor probability " + num(edge) + " reached the boundary margin after " +
                            std::to_string(step + 1) + " steps");
      }
    }
  }

  run.spinor = spinor;
  const double end_time = spinor.up.time + static_cast<double>(steps) * dt;
  std::array<WaveField*, 2> comps{&run.spinor.up, &run.spinor.down};
  for (int c = 0; c < 2; ++c) {
    const std::span<const cplx> view = c == 0 ? up_view : down_view;
    const double p = grid::norm_of(g, view);
    run.populations[c] = p;
    WaveField& f = *comps[c];
    f.time = end_time;
    const double scale = p > 0.0 ? 1.0 / std::sqrt(p) : 0.0;
    for (std::size_t i = 0; i < n; ++i) f.psi[i] = view[i] * scale;
  }
  run.spinor.c_up = std::sqrt(run.populations[0] / (run.populations[0] + run.populations[1]));
  run.spinor.c_down = std::sqrt(run.populations[1] / (run.populations[0] + run.populations[1]));
  return run;
}

double density_l1_distance(const SpinorField& a, const SpinorField& b) {
  if (!(a.up.grid == b.up.grid)) throw DomainError("spinors live on different grids");
  const double dv = a.up.grid.cell_volume();
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto da = a.density(c);
    const auto db = b.density(c);
    total += dv * pairwise_sum_of(da.size(), [&](std::size_t i) { return std::abs(da[i] - db[i]); });
  }
  return total;
}

double precession_frequency(double B0) {
  if (B0 < 0.0) throw DomainError("precession frequency needs B0 >= 0");
  return 2.0 * kBohrMagneton * B0 / kHbar;
}

double band_separation(const SGFieldConfig& config, double mass, double moment, double drift_time) {
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  if (drift_time < 0.0) throw DomainError("drift time must be >= 0");
  const double tau = config.transit_time();
  const double accel = moment * config.gradient_b0 / mass;
  return 2.0 * (0.5 * accel * tau * tau + accel * tau * drift_time);
}

std::vector<Band> large_spin_bands(double j, double theta, double phi, const SGFieldConfig& config,
                                   double drift_time, double mass, double top_moment) {
  if (j > 1e6) throw DomainError("large_spin_bands supports j <= 1e6");
  const auto state = spin::SpinCoherentState::from_j(j, theta, phi);
  const auto dist = spin::distribution(state);
  const double top = 0.5 * band_separation(config, mass, top_moment, drift_time);
  std::vector<Band> bands(dist.weights.size());
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const double m = dist.m(static_cast<int>(k));
    bands[k] = {m, (m / state.j()) * top, dist.weights[k]};
  }
  return bands;
}

}  // namespace qratio::sg
