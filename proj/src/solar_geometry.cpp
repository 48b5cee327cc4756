#include "pvcast/solar_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pvcast::solar {

namespace {
constexpr long double kPi = 3.14159265358979323846264338327950288L;
constexpr long double kDegToRad = kPi / 180.0L;
constexpr long double kRadToDeg = 180.0L / kPi;
}  // namespace

double sin_deg(double degrees) {
    return static_cast<double>(sinl(static_cast<long double>(degrees) * kDegToRad));
}

double cos_deg(double degrees) {
    return static_cast<double>(cosl(static_cast<long double>(degrees) * kDegToRad));
}

double asin_deg(double x) {
    return static_cast<double>(asinl(static_cast<long double>(x)) * kRadToDeg);
}

double solar_declination(int day_of_year_n) {
    return 23.45 * sin_deg(360.0 * (284.0 + day_of_year_n) / 365.0);
}

double solar_elevation(double latitude_deg, double declination_deg, double hour_angle_deg) {
    double s = sin_deg(latitude_deg) * sin_deg(declination_deg) +
               cos_deg(latitude_deg) * cos_deg(declination_deg) * cos_deg(hour_angle_deg);
    return asin_deg(std::clamp(s, -1.0, 1.0));
}

SolarPosition position_at(double latitude_deg, const Date& date, double hour_angle_deg) {
    SolarPosition p;
    p.latitude = latitude_deg;
    p.declination = solar_declination(day_of_year(date));
    p.hour_angle = hour_angle_deg;
    p.elevation = solar_elevation(latitude_deg, p.declination, hour_angle_deg);
    return p;
}

double module_irradiance(double s_horiz, double elevation_deg) {
    return s_horiz / sin_deg(std::max(elevation_deg, kElevationFloorDeg));
}

}  // namespace pvcast::solar
