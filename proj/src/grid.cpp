#include "qratio/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"

namespace qratio::grid {

namespace {

const FftPlan& cached_plan(std::size_t n0, std::size_t n1) {
  static std::mutex m;
  static std::map<std::tuple<std::size_t, std::size_t>, std::unique_ptr<FftPlan>> plans;
  std::lock_guard lock(m);
  auto& slot = plans[{n0, n1}];
  if (!slot) slot = std::make_unique<FftPlan>(n0, n1);
  return *slot;
}

std::size_t axis_index(const Grid& g, std::size_t idx, int axis) {
  return axis == 0 ? idx / g.points[1] : idx % g.points[1];
}

std::size_t neighbour(const Grid& g, std::size_t idx, int axis, int delta) {
  const std::size_t n = g.points[axis];
  const std::size_t i = axis_index(g, idx, axis);
  const std::size_t j = (i + n + static_cast<std::size_t>(delta + static_cast<int>(n))) % n;
  if (axis == 0) return j * g.points[1] + idx % g.points[1];
  return idx - i + j;
}

}  // namespace

Grid Grid::line(double extent, std::size_t points) {
  Grid g;
  g.dims = 1;
  g.points = {points, 1};
  g.extent = {extent, 0.0};
  g.validate();
  return g;
}

Grid Grid::plane(double extent0, std::size_t points0, double extent1, std::size_t points1) {
  Grid g;
  g.dims = 2;
  g.points = {points0, points1};
  g.extent = {extent0, extent1};
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dims != 1 && dims != 2) throw ResolutionError("grid must be 1D or 2D");
  for (int a = 0; a < dims; ++a) {
    if (points[a] < 64 || !is_power_of_two(points[a])) {
      throw ResolutionError("grid axis " + std::to_string(a) +
                            " needs a power-of-two point count >= 64, got " +
                            std::to_string(points[a]));
    }
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a])) {
      throw ResolutionError("grid extent must be positive");
    }
  }
  if (dims == 1 && points[1] != 1) throw ResolutionError("1D grid must have points[1] == 1");
}

double Grid::wavenumber(int axis, std::size_t i) const {
  const std::size_t n = points[axis];
  const double dk = 2.0 * kPi / extent[axis];
  const double signed_i = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
  return dk * signed_i;
}

double Grid::max_wavenumber(int axis) const { return kPi / spacing(axis); }

std::vector<double> Grid::coords(int axis) const {
  std::vector<double> x(points[axis]);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = coord(axis, i);
  return x;
}

double WaveField::norm() const { return norm_of(grid, psi); }

void PotentialSpec::validate(const Grid& g) const {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Linear>) {
          if (k.axis < 0 || k.axis >= g.dims) throw DomainError("linear potential axis out of range");
          if (!std::isfinite(k.slope)) throw DomainError("linear potential slope must be finite");
        } else if constexpr (std::is_same_v<K, Barrier>) {
          if (k.axis < 0 || k.axis >= g.dims) throw DomainError("barrier axis out of range");
          if (k.profile.size() != g.points[k.axis]) throw DomainError("barrier profile size mismatch");
          for (double v : k.profile) {
            if (!std::isfinite(v)) throw DomainError("barrier samples must be finite");
          }
          if (k.profile.front() != 0.0 || k.profile.back() != 0.0) {
            throw DomainError("barrier profile must vanish at the grid edges");
          }
        } else if constexpr (std::is_same_v<K, Mask>) {
          if (k.multiplier.size() != g.size()) throw DomainError("mask size mismatch");
        } else if constexpr (std::is_same_v<K, Custom>) {
          if (k.samples.size() != g.size()) throw DomainError("custom potential size mismatch");
          for (double v : k.samples) {
            if (!std::isfinite(v)) throw DomainError("potential samples must be finite");
          }
        }
      },
      kind_);
}

double PotentialSpec::value(const Grid& g, std::size_t idx) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Linear>) {
          return k.slope * g.coord(k.axis, axis_index(g, idx, k.axis));
        } else if constexpr (std::is_same_v<K, Barrier>) {
          return k.profile[axis_index(g, idx, k.axis)];
        } else if constexpr (std::is_same_v<K, Custom>) {
          return k.samples[idx];
        } else {
          return 0.0;
        }
      },
      kind_);
}

double PotentialSpec::gradient(const Grid& g, std::size_t idx, int axis) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        const double h = g.spacing(axis);
        if constexpr (std::is_same_v<K, Linear>) {
          return k.axis == axis ? k.slope : 0.0;
        } else if constexpr (std::is_same_v<K, Barrier>) {
          if (k.axis != axis) return 0.0;
          const std::size_t n = k.profile.size();
          const std::size_t i = axis_index(g, idx, axis);
          return (k.profile[(i + 1) % n] - k.profile[(i + n - 1) % n]) / (2.0 * h);
        } else if constexpr (std::is_same_v<K, Custom>) {
          return (k.samples[neighbour(g, idx, axis, 1)] - k.samples[neighbour(g, idx, axis, -1)]) /
                 (2.0 * h);
        } else {
          return 0.0;
        }
      },
      kind_);
}

double PotentialSpec::max_abs(const Grid& g) const {
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(value(g, i)));
  return m;
}

std::vector<cplx> gaussian_samples(const Grid& grid, int axis, const GaussianPacket& packet) {
  packet.validate();
  std::vector<cplx> out(grid.points[axis]);
  const double k0 = packet.momentum / kHbar;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = grid.coord(axis, i);
    const double u = (x - packet.center) / packet.width;
    out[i] = std::polar(std::exp(-u * u), k0 * x);
  }
  return out;
}

WaveField initialize_gaussian(const Grid& grid, std::span<const GaussianPacket> packets) {
  grid.validate();
  if (packets.size() != static_cast<std::size_t>(grid.dims)) {
    throw DomainError("initialize_gaussian needs one packet per grid axis");
  }
  std::array<std::vector<cplx>, 2> factors;
  for (int a = 0; a < grid.dims; ++a) {
    const auto& p = packets[a];
    p.validate();
    const double h = grid.spacing(a);
    const std::string axis = "axis " + std::to_string(a);
    if (p.width < 4.0 * h) {
      throw ResolutionError(axis + ": packet width " + num(p.width / h) +
                            " spacings is below the 4-spacing minimum");
    }
    const double half = 0.5 * grid.extent[a];
    const double clearance = half - (std::abs(p.center) + 3.0 * p.width);
    if (clearance < 8.0 * h) {
      throw ResolutionError(axis + ": packet support lies " + num(clearance / h) +
                            " spacings from the boundary, minimum is 8");
    }
    const double kspan = std::abs(p.momentum / kHbar) + 4.0 / p.width;
    if (kspan > grid.max_wavenumber(a)) {
      throw ResolutionError(axis + ": packet momentum content exceeds the grid bandwidth");
    }
    factors[a] = gaussian_samples(grid, a, p);
  }
  WaveField f;
  f.grid = grid;
  f.mass = packets[0].mass;
  f.psi.resize(grid.size());
  for (std::size_t i = 0; i < grid.points[0]; ++i) {
    for (std::size_t j = 0; j < grid.points[1]; ++j) {
      f.psi[i * grid.points[1] + j] = grid.dims == 1 ? factors[0][i] : factors[0][i] * factors[1][j];
    }
  }
  const double scale = 1.0 / std::sqrt(f.norm());
  for (auto& v : f.psi) v *= scale;
  return f;
}

double max_kinetic_energy(const Grid& grid, double mass) {
  double e = 0.0;
  for (int a = 0; a < grid.dims; ++a) {
    const double k = grid.max_wavenumber(a);
    e += kHbar * kHbar * k * k / (2.0 * mass);
  }
  return e;
}

double suggest_dt(const Grid& grid, double mass, const PotentialSpec& potential) {
  return 0.1 * kHbar / (potential.max_abs(grid) + max_kinetic_energy(grid, mass));
}

void check_time_step(const Grid& grid, double mass, const PotentialSpec& potential, double dt) {
  const double phase = std::abs(dt) * max_kinetic_energy(grid, mass) / kHbar;
  if (!(phase < kPi / 4.0)) {
    const double suggested = suggest_dt(grid, mass, potential);
    throw StepSizeError("time step too large: dt*E_max/hbar = " + num(phase) +
                            " >= pi/4; try dt = " + num(suggested),
                        suggested);
  }
}

ComplexBuffer kinetic_phase(const Grid& grid, double mass, double dt) {
  ComplexBuffer out(grid.size());
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  const double c = kHbar * dt / (2.0 * mass);
  for (std::size_t i = 0; i < grid.points[0]; ++i) {
    const double k0 = grid.wavenumber(0, i);
    for (std::size_t j = 0; j < grid.points[1]; ++j) {
      const double k1 = grid.dims == 2 ? grid.wavenumber(1, j) : 0.0;
      out[i * grid.points[1] + j] = std::polar(inv_n, -c * (k0 * k0 + k1 * k1));
    }
  }
  return out;
}

SplitStep::SplitStep(const Grid& grid, double mass, const PotentialSpec& potential, double dt,
                     std::size_t batch)
    : grid_(grid), dt_(dt), batch_(batch), plan_(grid.points[0], grid.points[1], batch) {
  grid.validate();
  potential.validate(grid);
  half_potential_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    half_potential_[i] = std::polar(1.0, -potential.value(grid, i) * dt / (2.0 * kHbar));
  }
  kinetic_ = kinetic_phase(grid, mass, dt);
  if (const auto* m = std::get_if<Mask>(&potential.kind())) mask_ = m->multiplier;
}

void SplitStep::step(std::span<cplx> data) const {
  const std::size_t n = grid_.size();
  for (std::size_t b = 0; b < batch_; ++b) {
    cplx* p = data.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) p[i] *= half_potential_[i];
  }
  plan_.forward(data);
  for (std::size_t b = 0; b < batch_; ++b) {
    cplx* p = data.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) p[i] *= kinetic_[i];
  }
  plan_.inverse(data);
  for (std::size_t b = 0; b < batch_; ++b) {
    cplx* p = data.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) p[i] *= half_potential_[i];
    if (!mask_.empty()) {
      for (std::size_t i = 0; i < n; ++i) p[i] *= mask_[i];
    }
  }
}

Snapshot observables(const WaveField& field) {
  const Grid& g = field.grid;
  Snapshot s;
  const double total = pairwise_sum_of(field.psi.size(), [&](std::size_t i) { return std::norm(field.psi[i]); });
  for (int a = 0; a < g.dims; ++a) {
    const double mean = pairwise_sum_of(field.psi.size(), [&](std::size_t i) {
                          return std::norm(field.psi[i]) * g.coord(a, axis_index(g, i, a));
                        }) / total;
    const double var = pairwise_sum_of(field.psi.size(), [&](std::size_t i) {
                         const double d = g.coord(a, axis_index(g, i, a)) - mean;
                         return std::norm(field.psi[i]) * d * d;
                       }) / total;
    s.mean_position[a] = mean;
    s.widths[a] = std::sqrt(2.0 * var);
  }
  ComplexBuffer spectrum(field.psi.begin(), field.psi.end());
  cached_plan(g.points[0], g.points[1]).forward(spectrum);
  const double spec_total = pairwise_sum_of(spectrum.size(), [&](std::size_t i) { return std::norm(spectrum[i]); });
  for (int a = 0; a < g.dims; ++a) {
    s.mean_momentum[a] = kHbar *
                         pairwise_sum_of(spectrum.size(), [&](std::size_t i) {
                           return std::norm(spectrum[i]) * g.wavenumber(a, axis_index(g, i, a));
                         }) /
                         spec_total;
  }
  return s;
}

std::array<double, 2> mean_force(const WaveField& field, const PotentialSpec& potential) {
  const Grid& g = field.grid;
  std::array<double, 2> f{};
  const double total = pairwise_sum_of(field.psi.size(), [&](std::size_t i) { return std::norm(field.psi[i]); });
  for (int a = 0; a < g.dims; ++a) {
    f[a] = -pairwise_sum_of(field.psi.size(), [&](std::size_t i) {
             return std::norm(field.psi[i]) * potential.gradient(g, i, a);
           }) / total;
  }
  return f;
}

void ObservableTrace::record(const WaveField& field, const PotentialSpec& potential) {
  if (!times.empty() && !(field.time > times.back())) {
    throw DomainError("trace times must increase strictly");
  }
  const Snapshot s = observables(field);
  dims = field.grid.dims;
  times.push_back(field.time);
  mean_position.push_back(s.mean_position);
  mean_momentum.push_back(s.mean_momentum);
  widths.push_back(s.widths);
  mean_force.push_back(grid::mean_force(field, potential));
}

EhrenfestResidual ehrenfest_residual(const ObservableTrace& trace, double mass) {
  const std::size_t n = trace.size();
  if (n < 3) throw DomainError("Ehrenfest residual needs at least 3 trace records");
  EhrenfestResidual r;
  const double duration = trace.times.back() - trace.times.front();
  for (int a = 0; a < trace.dims; ++a) {
    double vel_scale = 0.0, force_scale = 0.0, max_dx = 0.0, max_dp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vel_scale = std::max({vel_scale, std::abs(trace.mean_momentum[i][a] / mass),
                            kHbar / (mass * trace.widths[i][a])});
      force_scale = std::max({force_scale, std::abs(trace.mean_force[i][a]),
                              kHbar / (trace.widths[i][a] * duration)});
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double dt = trace.times[i + 1] - trace.times[i - 1];
      const double dxdt = (trace.mean_position[i + 1][a] - trace.mean_position[i - 1][a]) / dt;
      const double dpdt = (trace.mean_momentum[i + 1][a] - trace.mean_momentum[i - 1][a]) / dt;
      max_dx = std::max(max_dx, std::abs(dxdt - trace.mean_momentum[i][a] / mass));
      max_dp = std::max(max_dp, std::abs(dpdt - trace.mean_force[i][a]));
    }
    r.position = std::max(r.position, max_dx / vel_scale);
    r.momentum = std::max(r.momentum, max_dp / force_scale);
  }
  return r;
}

double boundary_probability(const WaveField& field, double margin) {
  return boundary_probability(field.grid, field.psi, margin);
}

double boundary_probability(const Grid& g, std::span<const cplx> psi, double margin) {
  std::array<std::size_t, 2> band{};
  for (int a = 0; a < g.dims; ++a) {
    band[a] = static_cast<std::size_t>(std::ceil(margin * static_cast<double>(g.points[a])));
  }
  const std::size_t n0 = g.points[0], n1 = g.points[1];
  std::vector<double> rows(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    const cplx* row = psi.data() + i * n1;
    if (i < band[0] || i >= n0 - band[0]) {
      rows[i] = pairwise_sum_of(n1, [&](std::size_t j) { return std::norm(row[j]); });
    } else if (g.dims == 2) {
      double s = 0.0;
      for (std::size_t j = 0; j < band[1]; ++j) s += std::norm(row[j]) + std::norm(row[n1 - 1 - j]);
      rows[i] = s;
    }
  }
  return g.cell_volume() * pairwise_sum(rows);
}

double norm_of(const Grid& g, std::span<const cplx> psi) {
  return g.cell_volume() * pairwise_sum_of(psi.size(), [&](std::size_t i) { return std::norm(psi[i]); });
}

WaveField propagate(WaveField field, const PotentialSpec& potential, double dt, std::size_t steps,
                    const PropagationOptions& options, PropagationStats* stats, ObservableTrace* trace) {
  if (steps < 1) throw DomainError("propagate needs at least one step");
  check_time_step(field.grid, field.mass, potential, dt);
  const SplitStep stepper(field.grid, field.mass, potential, dt);
  const bool unitary = potential.is_real();
  PropagationStats local;
  const double start_norm = field.norm();
  double norm = start_norm;
  if (trace != nullptr && options.record_every > 0 && trace->size() == 0) trace->record(field, potential);
  for (std::size_t s = 1; s <= steps; ++s) {
    stepper.step(field.psi);
    field.time += dt;
    if (unitary) {
      const double next = field.norm();
      local.max_norm_drift_per_step = std::max(local.max_norm_drift_per_step, std::abs(next - norm));
      norm = next;
    }
    if (options.monitor_boundary) {
      const double edge = boundary_probability(field, options.boundary_margin);
      if (edge >= options.boundary_tolerance) {
        throw BoundaryError("probability " + num(edge) + " reached the outer " +
                            num(options.boundary_margin * 100.0) +
                            "% margin at t = " + num(field.time) + " s");
      }
    }
    if (trace != nullptr && options.record_every > 0 && s % options.record_every == 0) {
      trace->record(field, potential);
    }
  }
  local.total_norm_drift = unitary ? std::abs(norm - start_norm) : 0.0;
  local.steps = steps;
  if (stats != nullptr) *stats = local;
  return field;
}

double l2_distance(const WaveField& a, const WaveField& b) {
  if (!(a.grid == b.grid)) throw DomainError("l2_distance needs fields on the same grid");
  return std::sqrt(a.grid.cell_volume() * pairwise_sum_of(a.psi.size(), [&](std::size_t i) {
                     return std::norm(a.psi[i] - b.psi[i]);
                   }));
}

}  // namespace qratio::grid
