#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace pvcast {

// Plain calendar date. No timezone; the POWER API and everything downstream
// works in whole days.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
bool is_valid_date(const Date& d);

// Ordinal day within the year, 1..366.
int day_of_year(const Date& d);

Date next_day(const Date& d);

// "20170101" -> Date. Returns nullopt on malformed or out-of-range input.
std::optional<Date> parse_yyyymmdd(std::string_view s);

std::string format_yyyymmdd(const Date& d);  // "20170101"
std::string format_iso(const Date& d);       // "2017-01-01"

}  // namespace pvcast
