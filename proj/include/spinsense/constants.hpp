#pragma once

#include <cmath>
#include <numbers>

namespace spinsense {

/// CODATA 2018 exact and recommended values. Not configurable.
///
/// `gamma_e` follows the convention gamma_e = g_e * mu_B / hbar with the
/// free-electron g-factor, so it is positive and carries units of rad/s/T.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;     // J s
  static constexpr double mu_B = 9.2740100783e-24;    // J/T
  static constexpr double k_B = 1.380649e-23;         // J/K
  static constexpr double mu_0 = 1.25663706212e-6;    // T m/A
  static constexpr double g_e = 2.00231930436256;
  static constexpr double gamma_e = g_e * mu_B / hbar;  // rad/s/T
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit helpers. Internally every rate is an angular frequency (rad/s) and every
// field is in tesla; these only appear at I/O boundaries.
constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
constexpr double rad_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }
constexpr double gauss_to_tesla(double gauss) { return gauss * 1e-4; }
constexpr double tesla_to_gauss(double tesla) { return tesla * 1e4; }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }
inline double db_to_voltage_gain(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_power_ratio(double db) { return std::pow(10.0, db / 10.0); }
inline double power_ratio_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace spinsense
