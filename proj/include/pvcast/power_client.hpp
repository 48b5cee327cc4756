#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pvcast/dates.hpp"
#include "pvcast/errors.hpp"

namespace pvcast::power {

// The v1 single-point endpoint. Deprecated upstream; kept for bit-exact URL
// construction and cassette replay. Live calls accept any base override.
inline constexpr std::string_view kDefaultBaseUrl =
    "https://power.larc.nasa.gov/cgi-bin/v1/DataAccess.py";

// Daily mean temperature, clearness index, all-sky horizontal irradiance.
const std::vector<std::string>& default_parameters();

// POWER encodes missing days as -999.
inline constexpr double kMissingSentinel = -999.0;

struct GeoQuery {
    double latitude = 0.0;   // degrees, [-90, 90]
    double longitude = 0.0;  // degrees, [-180, 180]
    Date start;
    Date end;
    std::vector<std::string> parameters = default_parameters();

    // Throws InvalidQuery when any invariant is violated.
    void validate() const;
};

enum class Source { Live, Fixture };
enum class FetchMode { Live, Fixture };

struct RawResponse {
    std::string url;
    std::string body;  // JSON text
    Source source = Source::Fixture;
};

struct DailyRecord {
    Date date;
    std::optional<double> t_avg;    // degC
    std::optional<double> kt;       // dimensionless, [0, 1]
    std::optional<double> s_horiz;  // kWh/m2/day

    bool complete() const { return t_avg && kt && s_horiz; }
};

// Shortest decimal that parses back to the same double ("17.84", "78.2", "0").
std::string render_coordinate(double value);

// Substitutes the query into the v1 template. Key order is fixed:
// request, identifier, parameters, startDate, endDate, userCommunity,
// tempAverage, outputList, lat, lon.
std::string build_power_url(const GeoQuery& query, std::string_view base = kDefaultBaseUrl);

// Cassettes: offline replay of one URL's response.
// Key is the lowercase hex SHA-256 of the full URL; the file holds the URL on
// line 1, a blank line, then the raw body bytes.
std::string cassette_key(std::string_view url);
std::filesystem::path cassette_path(const std::filesystem::path& dir, std::string_view url);
void write_cassette(const std::filesystem::path& dir, std::string_view url,
                    std::string_view body);
std::optional<std::string> read_cassette(const std::filesystem::path& dir,
                                         std::string_view url);

// Live: single attempt, 30 s timeout, records a cassette on success.
// Fixture: replays the cassette or throws FixtureMissing.
RawResponse fetch_daily(const GeoQuery& query, FetchMode mode,
                        const std::filesystem::path& cassette_dir,
                        std::string_view base_url = kDefaultBaseUrl);

// One record per date in the union of the parameter maps, ascending.
// Sentinel values come back as missing fields, never as numbers.
std::vector<DailyRecord> parse_power_response(const RawResponse& resp);

}  // namespace pvcast::power
