#include "qratio/tunneling.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"

namespace qratio::tunnel {

using grid::Grid;
using grid::PotentialSpec;
using grid::SplitStep;

namespace {

template <class... F>
struct Overload : F... {
  using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;

// Bisection on [inside, outside] where V(inside) > E >= V(outside).
double bisect(const BarrierSpec& b, double energy, double inside, double outside) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    if (b.value(mid) > energy) {
      inside = mid;
    } else {
      outside = mid;
    }
    if (std::abs(inside - outside) <= 1e-13 * std::max(std::abs(inside), std::abs(outside))) break;
  }
  return 0.5 * (inside + outside);
}

std::vector<double> scan_points(const BarrierSpec& b) {
  return std::visit(Overload{
                        [](const Rectangular& r) { return std::vector<double>{-r.half_width, r.half_width}; },
                        [](const GaussianBarrier& g) {
                          // odd count keeps the peak on a sample
                          const std::size_t n = 4097;
                          std::vector<double> z(n);
                          const double lo = -kGaussianCut * g.sigma;
                          for (std::size_t i = 0; i < n; ++i) {
                            z[i] = lo + 2.0 * kGaussianCut * g.sigma * static_cast<double>(i) / (n - 1);
                          }
                          z[n / 2] = 0.0;
                          return z;
                        },
                        [](const Sampled& s) { return s.z; },
                    },
                    b.kind());
}

double wavenumber_sq(double energy, double v, double mass) { return 2.0 * mass * (energy - v) / (kHbar * kHbar); }

void check_energy_mass(double energy, double mass) {
  if (!(mass > 0.0)) throw DomainError("mass must be > 0");
  if (!(energy > 0.0) || !std::isfinite(energy)) throw DomainError("energy must be > 0");
}

}  // namespace

void BarrierSpec::validate() const {
  std::visit(Overload{
                 [](const Rectangular& r) {
                   if (!(r.half_width > 0.0) || !std::isfinite(r.half_width)) {
                     throw DomainError("rectangular barrier needs a positive half-width");
                   }
                   if (!(r.height >= 0.0) || !std::isfinite(r.height)) {
                     throw DomainError("barrier height must be finite and >= 0");
                   }
                 },
                 [](const GaussianBarrier& g) {
                   if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) throw DomainError("Gaussian barrier needs sigma > 0");
                   if (!(g.height >= 0.0) || !std::isfinite(g.height)) {
                     throw DomainError("barrier height must be finite and >= 0");
                   }
                 },
                 [](const Sampled& s) {
                   if (s.z.size() < 2 || s.z.size() != s.V.size()) {
                     throw DomainError("sampled barrier needs matching z and V with at least 2 samples");
                   }
                   for (std::size_t i = 0; i < s.z.size(); ++i) {
                     if (!std::isfinite(s.z[i]) || !std::isfinite(s.V[i]) || s.V[i] < 0.0) {
                       throw DomainError("sampled barrier values must be finite and >= 0");
                     }
                     if (i > 0 && !(s.z[i] > s.z[i - 1])) throw DomainError("sampled z must be strictly increasing");
                   }
                 },
             },
             kind_);
}

double BarrierSpec::value(double z) const {
  return std::visit(Overload{
                        [&](const Rectangular& r) { return std::abs(z) <= r.half_width ? r.height : 0.0; },
                        [&](const GaussianBarrier& g) {
                          if (std::abs(z) > kGaussianCut * g.sigma) return 0.0;
                          return g.height * std::exp(-z * z / (2.0 * g.sigma * g.sigma));
                        },
                        [&](const Sampled& s) {
                          if (z < s.z.front() || z > s.z.back()) return 0.0;
                          const auto it = std::upper_bound(s.z.begin(), s.z.end(), z);
                          if (it == s.z.end()) return s.V.back();
                          const std::size_t i = static_cast<std::size_t>(it - s.z.begin());
                          const double t = (z - s.z[i - 1]) / (s.z[i] - s.z[i - 1]);
                          return s.V[i - 1] + t * (s.V[i] - s.V[i - 1]);
                        },
                    },
                    kind_);
}

double BarrierSpec::max_value() const {
  return std::visit(Overload{
                        [](const Rectangular& r) { return r.height; },
                        [](const GaussianBarrier& g) { return g.height; },
                        [](const Sampled& s) { return *std::max_element(s.V.begin(), s.V.end()); },
                    },
                    kind_);
}

std::array<double, 2> BarrierSpec::support() const {
  return std::visit(Overload{
                        [](const Rectangular& r) { return std::array{-r.half_width, r.half_width}; },
                        [](const GaussianBarrier& g) {
                          return std::array{-kGaussianCut * g.sigma, kGaussianCut * g.sigma};
                        },
                        [](const Sampled& s) { return std::array{s.z.front(), s.z.back()}; },
                    },
                    kind_);
}

double BarrierSpec::half_extent() const {
  const auto s = support();
  return std::max(std::abs(s[0]), std::abs(s[1]));
}

TurningPoints turning_points(const BarrierSpec& barrier, double energy) {
  barrier.validate();
  TurningPoints tp;
  if (energy >= barrier.max_value()) return tp;
  tp.forbidden = true;
  if (const auto* r = std::get_if<Rectangular>(&barrier.kind())) {
    tp.left = -r->half_width;
    tp.right = r->half_width;
    return tp;
  }
  const auto z = scan_points(barrier);
  std::size_t first = 0;
  while (!(barrier.value(z[first]) > energy)) ++first;
  std::size_t last = z.size() - 1;
  while (!(barrier.value(z[last]) > energy)) --last;
  // outside the support V = 0 < E
  tp.left = first == 0 ? z[0] : bisect(barrier, energy, z[first], z[first - 1]);
  tp.right = last == z.size() - 1 ? z.back() : bisect(barrier, energy, z[last], z[last + 1]);
  return tp;
}

double wkb_transmission(const BarrierSpec& barrier, double energy, double mass) {
  check_energy_mass(energy, mass);
  const auto tp = turning_points(barrier, energy);
  if (!tp.forbidden) return 1.0;
  double exponent = 0.0;
  if (const auto* r = std::get_if<Rectangular>(&barrier.kind())) {
    exponent = 2.0 * std::sqrt(2.0 * mass * (r->height - energy)) / kHbar * (2.0 * r->half_width);
  } else {
    // z = c - h cos(theta) removes the square-root behaviour at the turning points
    const double c = 0.5 * (tp.left + tp.right);
    const double h = 0.5 * (tp.right - tp.left);
    auto integrand = [&](double theta) {
      const double v = barrier.value(c - h * std::cos(theta)) - energy;
      return v > 0.0 ? std::sqrt(2.0 * mass * v) * h * std::sin(theta) : 0.0;
    };
    double err = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kPi, 20, 1e-11, &err);
    exponent = 2.0 * integral / kHbar;
  }
  return std::exp(-exponent);
}

double sliced_transmission(const BarrierSpec& barrier, double energy, double mass, std::size_t slices) {
  check_energy_mass(energy, mass);
  if (slices < 1) throw DomainError("transfer matrix needs at least one slice");
  const auto [lo, hi] = barrier.support();
  const double h = (hi - lo) / static_cast<double>(slices);
  const double k0 = std::sqrt(wavenumber_sq(energy, 0.0, mass));
  // (psi, psi') transfer, M = M_N ... M_1
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
  for (std::size_t s = 0; s < slices; ++s) {
    const double z = lo + (static_cast<double>(s) + 0.5) * h;
    const double q = wavenumber_sq(energy, barrier.value(z), mass);
    double a11, a12, a21;
    if (q > 0.0) {
      const double k = std::sqrt(q);
      a11 = std::cos(k * h);
      a12 = std::sin(k * h) / k;
      a21 = -k * std::sin(k * h);
    } else if (q < 0.0) {
      const double k = std::sqrt(-q);
      a11 = std::cosh(k * h);
      a12 = std::sinh(k * h) / k;
      a21 = k * std::sinh(k * h);
    } else {
      a11 = 1.0;
      a12 = h;
      a21 = 0.0;
    }
    const double n11 = a11 * m11 + a12 * m21;
    const double n12 = a11 * m12 + a12 * m22;
    const double n21 = a21 * m11 + a11 * m21;
    const double n22 = a21 * m12 + a11 * m22;
    m11 = n11;
    m12 = n12;
    m21 = n21;
    m22 = n22;
  }
  const double tr = m11 + m22;
  const double off = k0 * m12 - m21 / k0;
  return 4.0 / (tr * tr + off * off);
}

ExactTransmission exact_transmission_detail(const BarrierSpec& barrier, double energy, double mass) {
  barrier.validate();
  ExactTransmission out;
  std::size_t n = kMinSlices;
  double prev = sliced_transmission(barrier, energy, mass, n);
  while (true) {
    if (2 * n > kMaxSlices) {
      throw ConvergenceError("transfer matrix did not converge within " + std::to_string(kMaxSlices) +
                             " slices (last relative change " + num(out.last_change) + ")");
    }
    n *= 2;
    const double next = sliced_transmission(barrier, energy, mass, n);
    out.last_change = std::abs(next - prev) / std::max(next, std::numeric_limits<double>::min());
    prev = next;
    if (out.last_change < kSliceTolerance) break;
  }
  out.value = prev;
  out.slices = n;
  return out;
}

double exact_transmission(const BarrierSpec& barrier, double energy, double mass) {
  return exact_transmission_detail(barrier, energy, mass).value;
}

double energy_averaged_transmission(const BarrierSpec& barrier, const GaussianPacket& longitudinal) {
  longitudinal.validate();
  const double k0 = longitudinal.momentum / kHbar;
  const double w = longitudinal.width;
  if (!(k0 > 0.0)) throw DomainError("longitudinal packet needs a positive momentum");
  const double lo = std::max(0.0, k0 - 8.0 / w);
  const double hi = k0 + 8.0 / w;
  const double m = longitudinal.mass;
  auto weight = [&](double k) { return std::exp(-0.5 * (k - k0) * (k - k0) * w * w); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double norm = GK::integrate(weight, lo, hi, 10, 1e-12);
  const double num = GK::integrate(
      [&](double k) {
        if (!(k > 0.0)) return 0.0;
        return weight(k) * exact_transmission(barrier, kHbar * kHbar * k * k / (2.0 * m), m);
      },
      lo, hi, 3, 1e-9);
  return num / norm;
}

void TunnelScenario::validate() const {
  longitudinal.validate();
  for (const auto& t : transverse) {
    t.validate();
    if (t.mass != longitudinal.mass) throw DomainError("transverse and longitudinal packets need the same mass");
  }
  barrier.validate();
  if (std::abs(std::norm(c1) + std::norm(c2) - 1.0) > 1e-12) {
    throw DomainError("amplitudes must satisfy |c1|^2 + |c2|^2 = 1");
  }
  if (!(longitudinal.momentum > 0.0)) throw DomainError("longitudinal momentum must be > 0");
  const double sep = std::abs(transverse[1].center - transverse[0].center);
  const double a = std::max(transverse[0].width, transverse[1].width);
  if (!(sep > 3.0 * a)) {
    throw DomainError("transverse packets must be separated by more than 3 widths (separation " + num(sep) +
                      " m, width " + num(a) + " m)");
  }
  grid.validate();
  if (grid.dims != 2) throw DomainError("tunnel scenario needs an (x, z) plane");
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");
  if (max_steps < 1 || check_every < 1) throw DomainError("max_steps and check_every must be >= 1");
  if (longitudinal.center + 3.0 * longitudinal.width > -barrier.half_extent()) {
    throw DomainError("longitudinal packet must start left of the barrier support");
  }
}

double TunnelScenario::energy() const {
  return longitudinal.momentum * longitudinal.momentum / (2.0 * longitudinal.mass);
}

namespace {

struct Regions {
  double transmitted = 0.0;
  double reflected = 0.0;
  double inside = 0.0;
  double lobe_mean = 0.0;
};

// Splits a longitudinal marginal P(z_j) into z > a, z < -a and the rest.
Regions split_regions(const Grid& zline, std::span<const double> marginal, double a) {
  const double dz = zline.spacing(0);
  const std::size_t n = marginal.size();
  Regions r;
  r.transmitted = dz * pairwise_sum_of(n, [&](std::size_t j) { return zline.coord(0, j) > a ? marginal[j] : 0.0; });
  r.reflected = dz * pairwise_sum_of(n, [&](std::size_t j) { return zline.coord(0, j) < -a ? marginal[j] : 0.0; });
  r.inside = dz * pairwise_sum_of(n, [&](std::size_t j) {
               return std::abs(zline.coord(0, j)) <= a ? marginal[j] : 0.0;
             });
  if (r.transmitted > 0.0) {
    r.lobe_mean = dz * pairwise_sum_of(n, [&](std::size_t j) {
                    const double z = zline.coord(0, j);
                    return z > a ? z * marginal[j] : 0.0;
                  }) / r.transmitted;
  }
  return r;
}

std::vector<cplx> normalized(const Grid& line, std::vector<cplx> v) {
  const double s = 1.0 / std::sqrt(grid::norm_of(line, v));
  for (auto& x : v) x *= s;
  return v;
}

cplx inner(const Grid& line, std::span<const cplx> a, std::span<const cplx> b) {
  const double dx = line.spacing(0);
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * dx;
}

double visibility(const std::array<std::array<cplx, 2>, 2>& rho) {
  const double d = rho[0][0].real() + rho[1][1].real();
  return d > 0.0 ? 2.0 * std::abs(rho[0][1]) / d : 0.0;
}

std::size_t nearest(const Grid& line, double x) {
  const double idx = std::round((x - line.coord(0, 0)) / line.spacing(0));
  return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(line.points[0] - 1)));
}

// Transmitted weight left and right of the midpoint between the packets.
std::array<double, 2> side_weights(const Grid& line, std::span<const double> density, double x1, double x2,
                                   double scale) {
  const double mid = 0.5 * (x1 + x2);
  const double dx = line.spacing(0);
  const double left = dx * pairwise_sum_of(density.size(), [&](std::size_t i) {
                        const double x = line.coord(0, i);
                        return x < mid ? density[i] : (x == mid ? 0.5 * density[i] : 0.0);
                      });
  const double right = dx * pairwise_sum_of(density.size(), [&](std::size_t i) {
                         const double x = line.coord(0, i);
                         return x > mid ? density[i] : (x == mid ? 0.5 * density[i] : 0.0);
                       });
  return x1 < x2 ? std::array{scale * left, scale * right} : std::array{scale * right, scale * left};
}

}  // namespace

TunnelReport run_tunnel_scenario(const TunnelScenario& sc, bool with_decoherence,
                                 const std::optional<decoherence::EnvironmentSpec>& env) {
  sc.validate();
  if (with_decoherence && !env) throw DomainError("decohered mode needs an environment");
  if (env) env->validate();
  const Grid& g = sc.grid;
  const std::size_t nx = g.points[0], nz = g.points[1];
  const Grid xline = Grid::line(g.extent[0], nx);
  const Grid zline = Grid::line(g.extent[1], nz);
  const double mass = sc.longitudinal.mass;
  const double a = sc.barrier.half_extent();
  const double w = sc.longitudinal.width;
  const double threshold = a + 4.0 * w;

  // resolution checks for both product packets
  for (const auto& t : sc.transverse) grid::initialize_gaussian(g, std::array{t, sc.longitudinal});

  std::vector<double> profile(nz);
  for (std::size_t j = 0; j < nz; ++j) profile[j] = sc.barrier.value(zline.coord(0, j));

  std::array<ComplexBuffer, 2> packets;
  for (int k = 0; k < 2; ++k) {
    const auto v = normalized(xline, grid::gaussian_samples(xline, 0, sc.transverse[k]));
    packets[k].assign(v.begin(), v.end());
  }
  std::vector<cplx> chi(nx);
  for (std::size_t i = 0; i < nx; ++i) chi[i] = sc.c1 * packets[0][i] + sc.c2 * packets[1][i];
  chi = normalized(xline, std::move(chi));
  const auto phi = normalized(zline, grid::gaussian_samples(zline, 0, sc.longitudinal));

  TunnelReport r;
  r.decohered = with_decoherence;
  r.energy = sc.energy();
  r.tunneling_regime = r.energy < sc.barrier.max_value();
  r.central_transmission = exact_transmission(sc.barrier, r.energy, mass);
  r.wkb_central = wkb_transmission(sc.barrier, r.energy, mass);
  r.expected_transmission = energy_averaged_transmission(sc.barrier, sc.longitudinal);
  {
    std::array<std::array<cplx, 2>, 2> rho{};
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) rho[k][l] = inner(xline, packets[k], chi) * std::conj(inner(xline, packets[l], chi));
    }
    r.input_visibility = visibility(rho);
  }

  const SplitStep free_x(xline, mass, PotentialSpec::free(), sc.dt);
  grid::check_time_step(g, mass, PotentialSpec{grid::Barrier{profile, 1}}, sc.dt);
  const double x1 = sc.transverse[0].center, x2 = sc.transverse[1].center;

  auto finished = [&](const Regions& reg, double t) {
    // a negligible lobe follows the classical flight
    const double mean = reg.transmitted > 1e-14 ? reg.lobe_mean : sc.longitudinal.center + sc.longitudinal.momentum * t / mass;
    return mean > threshold && reg.inside < kBarrierResidual;
  };
  auto boundary_check = [&](double edge, std::size_t step) {
    if (edge >= 1e-6) {
      throw BoundaryError("probability " + num(edge) + " reached the boundary margin after " +
                          std::to_string(step) + " steps; enlarge the grid");
    }
  };
  auto not_separated = [&] {
    return ConvergenceError("transmitted lobe did not clear a + 4w = " + num(threshold) + " m within " +
                            std::to_string(sc.max_steps) + " steps");
  };

  if (!with_decoherence) {
    ComplexBuffer psi(nx * nz);
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < nz; ++j) psi[i * nz + j] = chi[i] * phi[j];
    }
    ComplexBuffer chi_t(chi.begin(), chi.end());
    const SplitStep stepper(g, mass, PotentialSpec{grid::Barrier{profile, 1}}, sc.dt);
    std::vector<double> marginal(nz);
    Regions reg;
    bool done = false;
    std::size_t s = 0;
    while (s < sc.max_steps && !done) {
      ++s;
      stepper.step(psi);
      free_x.step(chi_t);
      for (auto& p : packets) free_x.step(p);
      if (s % sc.check_every != 0 && s != sc.max_steps) continue;
      boundary_check(grid::boundary_probability(g, psi, 0.05), s);
      const double dx = xline.spacing(0);
      for (std::size_t j = 0; j < nz; ++j) {
        marginal[j] = dx * pairwise_sum_of(nx, [&](std::size_t i) { return std::norm(psi[i * nz + j]); });
      }
      reg = split_regions(zline, marginal, a);
      done = finished(reg, static_cast<double>(s) * sc.dt);
    }
    if (!done) throw not_separated();
    r.steps = s;
    r.elapsed = static_cast<double>(s) * sc.dt;
    r.transmitted = reg.transmitted;
    r.reflected = reg.reflected;

    const double dz = zline.spacing(0);
    std::vector<std::size_t> right;
    for (std::size_t j = 0; j < nz; ++j) {
      if (zline.coord(0, j) > a) right.push_back(j);
    }
    r.transverse_density.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      r.transverse_density[i] = dz * pairwise_sum_of(right.size(), [&](std::size_t q) {
                                  return std::norm(psi[i * nz + right[q]]);
                                }) / r.transmitted;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < nx; ++i) err += std::pow(r.transverse_density[i] - std::norm(chi_t[i]), 2);
    r.factorization_error = std::sqrt(err * xline.spacing(0));

    // projections A_k(z) = <psi_k | psi(., z)> on the transmitted side
    std::array<std::array<cplx, 2>, 2> rho{};
    std::vector<cplx> col(nx);
    for (const std::size_t j : right) {
      for (std::size_t i = 0; i < nx; ++i) col[i] = psi[i * nz + j];
      const std::array<cplx, 2> amp{inner(xline, packets[0], col), inner(xline, packets[1], col)};
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) rho[k][l] += amp[k] * std::conj(amp[l]) * dz;
      }
    }
    r.output_visibility = visibility(rho);

    const std::size_t i1 = nearest(xline, x1), i2 = nearest(xline, x2);
    cplx c12 = 0.0;
    double d1 = 0.0, d2 = 0.0;
    for (const std::size_t j : right) {
      c12 += psi[i1 * nz + j] * std::conj(psi[i2 * nz + j]);
      d1 += std::norm(psi[i1 * nz + j]);
      d2 += std::norm(psi[i2 * nz + j]);
    }
    r.coherence = d1 > 0.0 && d2 > 0.0 ? std::abs(c12) / std::sqrt(d1 * d2) : 0.0;
    r.weights = side_weights(xline, r.transverse_density, x1, x2, r.transmitted);
    r.density.resize(nx * nz);
    for (std::size_t i = 0; i < psi.size(); ++i) r.density[i] = std::norm(psi[i]);
    return r;
  }

  // decohered: transverse density matrix times a pure longitudinal state
  const Grid& zg = zline;
  ComplexBuffer phi_t(phi.begin(), phi.end());
  const SplitStep stepper(zg, mass, PotentialSpec{grid::Barrier{profile, 0}}, sc.dt);
  grid::WaveField chi_field;
  chi_field.grid = xline;
  chi_field.mass = mass;
  chi_field.psi.assign(chi.begin(), chi.end());
  auto rho = decoherence::damp(decoherence::pure_to_density(chi_field), *env, 5.0 / env->rate_Lambda);
  const decoherence::Decoherer dec(xline, mass, *env, PotentialSpec::free(), sc.dt);
  std::vector<double> marginal(nz);
  Regions reg;
  bool done = false;
  std::size_t s = 0;
  grid::WaveField diag;
  diag.grid = xline;
  diag.psi.resize(nx);
  while (s < sc.max_steps && !done) {
    ++s;
    stepper.step(phi_t);
    dec.step(rho);
    for (auto& p : packets) free_x.step(p);
    if (s % sc.check_every != 0 && s != sc.max_steps) continue;
    for (std::size_t i = 0; i < nx; ++i) diag.psi[i] = std::sqrt(std::max(0.0, rho.at(i, i).real()));
    boundary_check(grid::boundary_probability(zg, phi_t, 0.05) + grid::boundary_probability(diag, 0.05), s);
    for (std::size_t j = 0; j < nz; ++j) marginal[j] = std::norm(phi_t[j]);
    reg = split_regions(zg, marginal, a);
    done = finished(reg, static_cast<double>(s) * sc.dt);
  }
  if (!done) throw not_separated();
  r.steps = s;
  r.elapsed = static_cast<double>(s) * sc.dt;
  const double tr = rho.trace();
  r.transmitted = reg.transmitted * tr;
  r.reflected = reg.reflected * tr;
  const auto d = rho.diagonal();
  r.transverse_density.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) r.transverse_density[i] = d[i] / tr;

  std::array<std::array<cplx, 2>, 2> proj{};
  const double dx = xline.spacing(0);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      cplx sum = 0.0;
      for (std::size_t i = 0; i < nx; ++i) {
        cplx row = 0.0;
        for (std::size_t j = 0; j < nx; ++j) row += rho.at(i, j) * packets[l][j];
        sum += std::conj(packets[k][i]) * row;
      }
      proj[k][l] = sum * dx * dx / tr;
    }
  }
  r.output_visibility = visibility(proj);
  r.coherence = decoherence::coherence(rho, x1, x2);
  r.weights = side_weights(xline, r.transverse_density, x1, x2, r.transmitted);
  r.density.resize(nx * nz);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nz; ++j) r.density[i * nz + j] = d[i] * std::norm(phi_t[j]);
  }
  return r;
}

}  // namespace qratio::tunnel
