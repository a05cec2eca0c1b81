#pragma once

#include <numbers>

namespace qratio {

// SI values. h, e and c are exact by definition of the SI; the rest carry
// CODATA 2018 recommended values.
struct PhysicalConstants {
  double planck_h;
  double hbar;
  double bohr_magneton;
  double atomic_mass_unit;
  double electron_mass;
  double elementary_charge;
  double speed_of_light;
};

inline constexpr PhysicalConstants kConstants{
    .planck_h = 6.62607015e-34,
    .hbar = 6.62607015e-34 / (2.0 * std::numbers::pi),
    .bohr_magneton = 9.2740100783e-24,
    .atomic_mass_unit = 1.66053906660e-27,
    .electron_mass = 9.1093837015e-31,
    .elementary_charge = 1.602176634e-19,
    .speed_of_light = 299792458.0,
};

inline constexpr double kHbar = kConstants.hbar;
inline constexpr double kPlanck = kConstants.planck_h;
inline constexpr double kBohrMagneton = kConstants.bohr_magneton;
inline constexpr double kAmu = kConstants.atomic_mass_unit;
inline constexpr double kElectronMass = kConstants.electron_mass;
inline constexpr double kElectronVolt = kConstants.elementary_charge;
inline constexpr double kMeVPerC2 =
    1.0e6 * kConstants.elementary_charge / (kConstants.speed_of_light * kConstants.speed_of_light);

inline constexpr double kAngstrom = 1.0e-10;
inline constexpr double kPi = std::numbers::pi;

}  // namespace qratio
