#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qratio/fft.hpp"

namespace qratio::talbot {

enum class GratingKind { Absorptive, Phase };

// Slits centred on x = 0; slit j spans (j - (count - 1)/2) d +- open_fraction d / 2.
// Phase gratings transmit exp(i phase) through the bars and 1 through the openings.
struct GratingSpec {
  double period = 1.0;  // d, m
  double open_fraction = 0.3;
  int slit_count = 64;
  GratingKind kind = GratingKind::Absorptive;
  double phase = 0.0;  // rad, phase gratings only

  void validate() const;
  double array_width() const { return period * slit_count; }
  // Raised-cosine taper over the outer two periods of the array, 0 outside.
  double envelope(double x) const;
  // Fraction of [x0, x1] covered by openings.
  double open_coverage(double x0, double x1) const;
};

// L_T = d^2 / lambda.
double talbot_length(double period, double wavelength);

inline constexpr double kParaxialLimit = 0.1;  // lambda / d
inline constexpr std::size_t kMinPointsPerOpening = 16;

struct CarpetOptions {
  std::size_t points_per_period = 64;  // power of two
  std::size_t window_periods = 0;      // grid extent in periods, 0: 2 x slit count
  bool taper = true;
};

// Intensity I(x, z) on planes z_k = k z_max / z_steps, k = 0..z_steps.
struct Carpet {
  double period = 0.0;
  double wavelength = 0.0;
  double talbot_length = 0.0;
  std::vector<double> x;
  std::vector<double> z;
  std::vector<double> intensity;  // plane-major, z index * x.size() + x index
  std::vector<double> power;      // integral of I dx on each plane
  std::size_t window_lo = 0;      // central 50% of the slit array
  std::size_t window_hi = 0;

  std::span<const double> plane(std::size_t k) const {
    return std::span(intensity).subspan(k * x.size(), x.size());
  }
  // I(x, z) at an arbitrary distance from the stored input spectrum.
  std::vector<double> intensity_at(double distance) const;

  ComplexBuffer spectrum;  // FFT of the transmitted field at z = 0+
  double normalization = 1.0;
};

// Fresnel propagation of the grating-masked unit plane wave, normalized so
// the mean of I over the central window is 1 at z = 0+. Throws ConfigError
// when lambda/d >= kParaxialLimit or an opening spans fewer than
// kMinPointsPerOpening grid points.
Carpet propagate_carpet(const GratingSpec& grating, double wavelength, double z_max, std::size_t z_steps,
                        const CarpetOptions& options = {});

// Pearson correlation over equally sized samples.
double pearson(std::span<const double> a, std::span<const double> b);

// Correlation of I(x, z) with I(x, 0+) over the central window.
double revival_fidelity(const Carpet& carpet, double distance);

// Correlation of I(x, z) with I(x - shift, 0+) over the central window; the
// shift is rounded to whole grid spacings.
double shifted_correlation(const Carpet& carpet, double distance, double shift);

struct LauConfig {
  GratingSpec source;       // G1, incoherent point sources in each opening
  GratingSpec diffraction;  // G2
  GratingSpec scan;         // G3, moved transversally
  double L1 = 0.0;          // G1 to G2
  double L2 = 0.0;          // G2 to G3
  double wavelength = 0.0;
  std::size_t sources_per_slit = 8;
  std::size_t points_per_period = 256;  // on the G2 period, power of two
  std::size_t window_periods = 0;       // 0: 2 x the widest array

  // Throws ConfigError on non-positive distances, lambda/d >= kParaxialLimit,
  // fewer than 8 sources per slit, or a source chirp the grid cannot sample.
  void validate() const;
};

struct LauCurve {
  std::vector<double> offsets;
  std::vector<double> flux;  // normalized to max 1
  double visibility = 0.0;   // (max - min) / (max + min)
};

// Incoherent sum over G1 point sources of the G2-diffracted intensity
// transmitted through G3 at each offset. `source_phases`, when given, sets a
// phase per source (one per source in slit-major order).
LauCurve lau_scan(const LauConfig& config, std::span<const double> offsets,
                  std::span<const double> source_phases = {});

}  // namespace qratio::talbot
