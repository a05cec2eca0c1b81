#include "qratio/gaussian_packet.hpp"

#include <cmath>

#include "qratio/constants.hpp"
#include "qratio/error.hpp"

namespace qratio {

void GaussianPacket::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("packet width must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("packet mass must be positive");
  if (!std::isfinite(center) || !std::isfinite(momentum)) {
    throw DomainError("packet center and momentum must be finite");
  }
}

double de_broglie_wavelength(double mass, double speed) {
  if (!(mass > 0.0) || !(speed > 0.0)) {
    throw DomainError("de Broglie wavelength needs positive mass and speed");
  }
  return kPlanck / (mass * speed);
}

double packet_width_at(const GaussianPacket& packet, double t) {
  packet.validate();
  if (!(t >= 0.0)) throw DomainError("packet_width_at needs t >= 0");
  const double a = packet.width;
  const double tau = 2.0 * kHbar * t / (packet.mass * a * a);
  return a * std::sqrt(1.0 + tau * tau);
}

double doubling_time(double mass, double initial_width) {
  if (!(mass > 0.0) || !(initial_width > 0.0)) {
    throw DomainError("doubling_time needs positive mass and width");
  }
  return std::sqrt(3.0) * mass * initial_width * initial_width / (2.0 * kHbar);
}

}  // namespace qratio
