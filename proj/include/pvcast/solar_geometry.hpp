#pragma once

#include "pvcast/dates.hpp"

namespace pvcast::solar {

// Degree-argument trig. Evaluated in extended precision so that the exact
// anchor points survive the round trip to double: sin_deg(30) == 0.5,
// sin_deg(90) == 1.0, asin_deg(1) == 90.0.
double sin_deg(double degrees);
double cos_deg(double degrees);
double asin_deg(double x);

// Hour angle of 12:40 local solar time: 40 minutes past noon at 0.25 deg/min.
inline constexpr double kMiddayHourAngleDeg = 10.0;

// Elevations below this are clamped before dividing irradiance, so the
// module-plane feature stays bounded through polar winters.
inline constexpr double kElevationFloorDeg = 10.0;

struct SolarPosition {
    double latitude = 0.0;     // degrees
    double declination = 0.0;  // degrees, within [-23.45, 23.45]
    double hour_angle = 0.0;   // degrees
    double elevation = 0.0;    // degrees, within [-90, 90]
};

// Cooper's formula: 23.45 * sin(360 * (284 + n) / 365).
double solar_declination(int day_of_year_n);

// asin(sin(lat) sin(decl) + cos(lat) cos(decl) cos(hour_angle)), all degrees.
double solar_elevation(double latitude_deg, double declination_deg, double hour_angle_deg);

SolarPosition position_at(double latitude_deg, const Date& date, double hour_angle_deg);

// Horizontal irradiance converted to the module (panel-normal) plane:
// s_horiz / sin(max(elevation, floor)).
double module_irradiance(double s_horiz, double elevation_deg);

}  // namespace pvcast::solar
