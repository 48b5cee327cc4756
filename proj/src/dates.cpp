#include "pvcast/dates.hpp"

#include <array>
#include <cstdio>

namespace pvcast {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[static_cast<std::size_t>(month - 1)];
}

bool is_valid_date(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

int day_of_year(const Date& d) {
    int n = d.day;
    for (int m = 1; m < d.month; ++m) n += days_in_month(d.year, m);
    return n;
}

Date next_day(const Date& d) {
    Date n = d;
    if (d.day < days_in_month(d.year, d.month)) {
        ++n.day;
    } else if (d.month < 12) {
        ++n.month;
        n.day = 1;
    } else {
        ++n.year;
        n.month = 1;
        n.day = 1;
    }
    return n;
}

std::optional<Date> parse_yyyymmdd(std::string_view s) {
    if (s.size() != 8) return std::nullopt;
    for (char c : s)
        if (c < '0' || c > '9') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
        return v;
    };
    Date d{num(0, 4), num(4, 2), num(6, 2)};
    if (!is_valid_date(d)) return std::nullopt;
    return d;
}

std::string format_yyyymmdd(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d%02d%02d", d.year, d.month, d.day);
    return buf;
}

std::string format_iso(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace pvcast
