#include "qratio/talbot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"
#include "qratio/numeric.hpp"

namespace qratio::talbot {

namespace {

// exp(-i pi lambda z f^2) / N on the FFT bins of an n-point grid of extent X
ComplexBuffer fresnel_kernel(std::size_t n, double extent, double wavelength, double z) {
  ComplexBuffer k(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    const double f = m / extent;
    k[i] = std::polar(inv_n, -kPi * wavelength * z * f * f);
  }
  return k;
}

cplx transmission(const GratingSpec& g, double x, double dx, bool taper) {
  const double env = taper ? g.envelope(x) : (std::abs(x) <= 0.5 * g.array_width() ? 1.0 : 0.0);
  if (env == 0.0) return 0.0;
  const double cov = g.open_coverage(x - 0.5 * dx, x + 0.5 * dx);
  if (g.kind == GratingKind::Absorptive) return env * cov;
  return env * (cov + (1.0 - cov) * std::polar(1.0, g.phase));
}

void check_paraxial(const GratingSpec& g, double wavelength) {
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be > 0");
  if (!(wavelength / g.period < kParaxialLimit)) {
    throw ConfigError("lambda/d = " + num(wavelength / g.period) + " exceeds the paraxial bound " +
                      num(kParaxialLimit));
  }
}

void check_points(std::size_t points_per_period, const GratingSpec& g, double dx) {
  if (!is_power_of_two(points_per_period)) throw ConfigError("points per period must be a power of two");
  if (g.open_fraction * g.period / dx < static_cast<double>(kMinPointsPerOpening)) {
    throw ConfigError("grating openings need at least " + std::to_string(kMinPointsPerOpening) +
                      " grid points; raise points_per_period");
  }
}

std::vector<double> intensity_from(const ComplexBuffer& spectrum, double extent, double wavelength, double z,
                                   double normalization) {
  const std::size_t n = spectrum.size();
  const auto kernel = fresnel_kernel(n, extent, wavelength, z);
  ComplexBuffer buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = spectrum[i] * kernel[i];
  const FftPlan plan(n, 1);
  plan.inverse(buf);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(buf[i]) / normalization;
  return out;
}

}  // namespace

void GratingSpec::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("grating period must be > 0");
  if (!(open_fraction > 0.0 && open_fraction < 1.0)) throw ConfigError("open fraction must lie in (0, 1)");
  if (slit_count < 2) throw ConfigError("a grating needs at least 2 slits");
  if (!std::isfinite(phase)) throw ConfigError("phase must be finite");
}

double GratingSpec::envelope(double x) const {
  const double u = 0.5 * array_width() - std::abs(x);
  if (u < 0.0) return 0.0;
  const double ramp = 2.0 * period;
  if (u >= ramp) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * u / ramp));
}

double GratingSpec::open_coverage(double x0, double x1) const {
  if (!(x1 > x0)) return 0.0;
  const double h = 0.5 * open_fraction * period;
  const double mid = 0.5 * (slit_count - 1);
  const long lo = std::max(0L, static_cast<long>(std::floor((x0 - h) / period + mid)));
  const long hi = std::min(static_cast<long>(slit_count) - 1, static_cast<long>(std::ceil((x1 + h) / period + mid)));
  double covered = 0.0;
  for (long j = lo; j <= hi; ++j) {
    const double c = (static_cast<double>(j) - mid) * period;
    covered += std::max(0.0, std::min(x1, c + h) - std::max(x0, c - h));
  }
  return covered / (x1 - x0);
}

double talbot_length(double period, double wavelength) {
  if (!(period > 0.0) || !(wavelength > 0.0)) throw DomainError("Talbot length needs d > 0 and lambda > 0");
  return period * period / wavelength;
}

Carpet propagate_carpet(const GratingSpec& grating, double wavelength, double z_max, std::size_t z_steps,
                        const CarpetOptions& options) {
  grating.validate();
  check_paraxial(grating, wavelength);
  if (!(z_max >= 0.0) || z_steps < 1) throw ConfigError("carpet needs z_max >= 0 and at least one step");
  const std::size_t periods =
      options.window_periods > 0 ? options.window_periods : std::bit_ceil(static_cast<std::size_t>(2 * grating.slit_count));
  if (!is_power_of_two(periods) || periods < static_cast<std::size_t>(grating.slit_count)) {
    throw ConfigError("window must be a power-of-two number of periods covering the slit array");
  }
  const std::size_t n = periods * options.points_per_period;
  const double extent = static_cast<double>(periods) * grating.period;
  const double dx = extent / static_cast<double>(n);
  check_points(options.points_per_period, grating, dx);

  Carpet c;
  c.period = grating.period;
  c.wavelength = wavelength;
  c.talbot_length = talbot_length(grating.period, wavelength);
  c.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.x[i] = -0.5 * extent + static_cast<double>(i) * dx;
  const double quarter = 0.25 * grating.array_width();
  c.window_lo = static_cast<std::size_t>(std::ceil((-quarter + 0.5 * extent) / dx));
  c.window_hi = static_cast<std::size_t>(std::floor((quarter + 0.5 * extent) / dx));

  ComplexBuffer field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = transmission(grating, c.x[i], dx, options.taper);
  double mean = 0.0;
  for (std::size_t i = c.window_lo; i < c.window_hi; ++i) mean += std::norm(field[i]);
  mean /= static_cast<double>(c.window_hi - c.window_lo);
  if (!(mean > 0.0)) throw ConfigError("grating transmits nothing in the central window");
  c.normalization = mean;
  c.spectrum = field;
  FftPlan(n, 1).forward(c.spectrum);

  c.z.resize(z_steps + 1);
  c.intensity.resize((z_steps + 1) * n);
  c.power.resize(z_steps + 1);
  for (std::size_t k = 0; k <= z_steps; ++k) {
    c.z[k] = z_max * static_cast<double>(k) / static_cast<double>(z_steps);
    const auto plane = k == 0 ? [&] {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = std::norm(field[i]) / mean;
      return p;
    }()
                              : c.intensity_at(c.z[k]);
    std::copy(plane.begin(), plane.end(), c.intensity.begin() + static_cast<std::ptrdiff_t>(k * n));
    c.power[k] = dx * pairwise_sum(plane);
  }
  return c;
}

std::vector<double> Carpet::intensity_at(double distance) const {
  const double extent = x.size() > 1 ? (x[1] - x[0]) * static_cast<double>(x.size()) : 0.0;
  return intensity_from(spectrum, extent, wavelength, distance, normalization);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("correlation needs two samples of equal size");
  const double n = static_cast<double>(a.size());
  const double ma = pairwise_sum(a) / n, mb = pairwise_sum(b) / n;
  const double sab = pairwise_sum_of(a.size(), [&](std::size_t i) { return (a[i] - ma) * (b[i] - mb); });
  const double saa = pairwise_sum_of(a.size(), [&](std::size_t i) { return (a[i] - ma) * (a[i] - ma); });
  const double sbb = pairwise_sum_of(a.size(), [&](std::size_t i) { return (b[i] - mb) * (b[i] - mb); });
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DomainError("correlation undefined for a pattern without contrast");
  return sab / std::sqrt(saa * sbb);
}

double revival_fidelity(const Carpet& carpet, double distance) { return shifted_correlation(carpet, distance, 0.0); }

double shifted_correlation(const Carpet& carpet, double distance, double shift) {
  if (carpet.x.size() < 2) throw DomainError("empty carpet");
  if (distance < 0.0 || distance > carpet.z.back() * (1.0 + 1e-12)) {
    throw DomainError("distance lies outside the carpet range");
  }
  const double dx = carpet.x[1] - carpet.x[0];
  const long s = std::lround(shift / dx);
  const auto ref = carpet.plane(0);
  const auto now = carpet.intensity_at(distance);
  const long lo = static_cast<long>(carpet.window_lo), hi = static_cast<long>(carpet.window_hi);
  if (lo - s < 0 || hi - s > static_cast<long>(ref.size())) throw DomainError("shift moves the window off the grid");
  std::vector<double> a, b;
  for (long i = lo; i < hi; ++i) {
    a.push_back(now[static_cast<std::size_t>(i)]);
    b.push_back(ref[static_cast<std::size_t>(i - s)]);
  }
  return pearson(a, b);
}

void LauConfig::validate() const {
  source.validate();
  diffraction.validate();
  scan.validate();
  if (!(L1 > 0.0) || !(L2 > 0.0)) throw ConfigError("grating distances must be > 0");
  for (const auto* g : {&source, &diffraction, &scan}) check_paraxial(*g, wavelength);
  if (sources_per_slit < 8) throw ConfigError("each source slit needs at least 8 point sources");
  const double dx = diffraction.period / static_cast<double>(points_per_period);
  check_points(points_per_period, diffraction, dx);
  // the source chirp exp(i pi (x - s)^2 / lambda L1) must stay below Nyquist on G2
  const double reach = 0.5 * (source.array_width() + diffraction.array_width());
  if (reach / (wavelength * L1) > 0.5 / dx) {
    throw ConfigError("grid cannot sample the source wavefronts on G2; raise points_per_period or L1");
  }
}

LauCurve lau_scan(const LauConfig& cfg, std::span<const double> offsets, std::span<const double> source_phases) {
  cfg.validate();
  const GratingSpec& g2 = cfg.diffraction;
  const double dx = g2.period / static_cast<double>(cfg.points_per_period);
  const double widest = std::max({cfg.source.array_width(), g2.array_width(), cfg.scan.array_width()});
  const std::size_t periods = cfg.window_periods > 0
                                  ? cfg.window_periods
                                  : std::bit_ceil(static_cast<std::size_t>(std::ceil(2.0 * widest / g2.period)));
  if (!is_power_of_two(periods)) throw ConfigError("window must be a power-of-two number of periods");
  const std::size_t n = periods * cfg.points_per_period;
  const double extent = static_cast<double>(periods) * g2.period;
  if (extent < widest) throw ConfigError("window is narrower than the gratings");
  for (const double o : offsets) {
    if (std::abs(o) > cfg.scan.period * (1.0 + 1e-12) + 1e-300) {
      throw DomainError("scan offsets must lie within +-d of the centre");
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -0.5 * extent + static_cast<double>(i) * dx;
  std::vector<cplx> t2(n);
  for (std::size_t i = 0; i < n; ++i) t2[i] = transmission(g2, x[i], dx, true);

  // point sources, slit-major
  const GratingSpec& g1 = cfg.source;
  const double mid = 0.5 * (g1.slit_count - 1);
  const std::size_t total_sources = static_cast<std::size_t>(g1.slit_count) * cfg.sources_per_slit;
  if (!source_phases.empty() && source_phases.size() != total_sources) {
    throw DomainError("need one phase per source (" + std::to_string(total_sources) + ")");
  }

  const auto kernel = fresnel_kernel(n, extent, cfg.wavelength, cfg.L2);
  const FftPlan plan(n, 1);
  ComplexBuffer buf(n);
  std::vector<double> screen(n, 0.0);
  std::size_t src = 0;
  for (int j = 0; j < g1.slit_count; ++j) {
    const double c = (j - mid) * g1.period;
    for (std::size_t q = 0; q < cfg.sources_per_slit; ++q, ++src) {
      const double s = c + g1.open_fraction * g1.period *
                               (-0.5 + (static_cast<double>(q) + 0.5) / static_cast<double>(cfg.sources_per_slit));
      const double env = g1.envelope(s);
      if (env == 0.0) continue;
      const double phase = source_phases.empty() ? 0.0 : source_phases[src];
      for (std::size_t i = 0; i < n; ++i) {
        const double u = x[i] - s;
        buf[i] = t2[i] * std::polar(1.0, kPi * u * u / (cfg.wavelength * cfg.L1) + phase);
      }
      plan.forward(buf);
      for (std::size_t i = 0; i < n; ++i) buf[i] *= kernel[i];
      plan.inverse(buf);
      const double w = env * env;
      for (std::size_t i = 0; i < n; ++i) screen[i] += w * std::norm(buf[i]);
    }
  }

  LauCurve out;
  out.offsets.assign(offsets.begin(), offsets.end());
  out.flux.resize(offsets.size());
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double o = offsets[k];
    out.flux[k] = dx * pairwise_sum_of(n, [&](std::size_t i) {
                    return screen[i] * cfg.scan.open_coverage(x[i] - 0.5 * dx - o, x[i] + 0.5 * dx - o);
                  });
  }
  if (!out.flux.empty()) {
    const auto [mn, mx] = std::minmax_element(out.flux.begin(), out.flux.end());
    const double lo = *mn, hi = *mx;
    if (hi > 0.0) {
      for (auto& f : out.flux) f /= hi;
    }
    out.visibility = hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
  }
  return out;
}

}  // namespace qratio::talbot
