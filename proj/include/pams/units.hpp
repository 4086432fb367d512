#pragma once

#include <cmath>

namespace pams {

/// Speed of light in vacuum, m/s (exact SI value, not 3e8).
inline constexpr double speed_of_light = 299'792'458.0;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

} // namespace pams
