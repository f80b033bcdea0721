#pragma once

namespace p2g {

inline constexpr double kAtmosphericBar = 1.01325;

constexpr double barg_to_abs(double barg) { return barg + kAtmosphericBar; }
constexpr double abs_to_barg(double bar_abs) { return bar_abs - kAtmosphericBar; }

/// Specific gas constant of hydrogen [J/(kg K)].
inline constexpr double kRHydrogen = 4124.0;
/// Lower heating value of hydrogen [kWh/kg].
inline constexpr double kH2LhvKWhPerKg = 33.3;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kHoursPerYear = 8760.0;

}  // namespace p2g
