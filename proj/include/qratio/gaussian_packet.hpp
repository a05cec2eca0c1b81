#pragma once

namespace qratio {

// Free Gaussian wave packet psi(x) ~ exp(-(x - center)^2 / width^2 + i p x / hbar).
// `width` is the 1/e half-width of the amplitude, a = 2 hbar / b for a
// momentum amplitude ~ exp(-(p - p0)^2 / b^2). The probability density has
// standard deviation a/2 and 1/e half-width a/sqrt(2).
struct GaussianPacket {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  double mass = 1.0;

  // Throws DomainError unless width > 0 and mass > 0.
  void validate() const;
};

// lambda = h / (m v).
double de_broglie_wavelength(double mass, double speed);

// a(t) = a sqrt(1 + (2 hbar t / (m a^2))^2), the amplitude width of a freely
// spreading packet.
double packet_width_at(const GaussianPacket& packet, double t);

// Time for the amplitude width to double: sqrt(3) m a^2 / (2 hbar).
double doubling_time(double mass, double initial_width);

}  // namespace qratio
