#pragma once

#include <cmath>

namespace dbs::units {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace dbs::units
