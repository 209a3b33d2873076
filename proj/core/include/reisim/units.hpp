#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace reisim {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kMetersPerSecondPerMph = 0.44704;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
constexpr double mph_to_mps(double mph) { return mph * kMetersPerSecondPerMph; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace reisim
