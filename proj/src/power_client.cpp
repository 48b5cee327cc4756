#include "pvcast/power_client.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace pvcast::power {

namespace {

constexpr std::string_view kParamTemperature = "T2M";
constexpr std::string_view kParamClearness = "ALLSKY_KT";
constexpr std::string_view kParamIrradiance = "ALLSKY_SFC_SW_DWN";

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& default_parameters() {
    static const std::vector<std::string> params = {
        std::string(kParamTemperature),
        std::string(kParamClearness),
        std::string(kParamIrradiance),
    };
    return params;
}

void GeoQuery::validate() const {
    if (latitude < -90.0 || latitude > 90.0)
        throw InvalidQuery("latitude " + render_coordinate(latitude) + " out of [-90, 90]");
    if (longitude < -180.0 || longitude > 180.0)
        throw InvalidQuery("longitude " + render_coordinate(longitude) + " out of [-180, 180]");
    if (!is_valid_date(start) || !is_valid_date(end))
        throw InvalidQuery("invalid calendar date in query");
    if (end < start)
        throw InvalidQuery("start " + format_yyyymmdd(start) + " after end " +
                           format_yyyymmdd(end));
    if (parameters.empty()) throw InvalidQuery("parameter list is empty");
    std::set<std::string> seen;
    for (const auto& p : parameters)
        if (!seen.insert(p).second) throw InvalidQuery("duplicate parameter " + p);
}

std::string render_coordinate(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string build_power_url(const GeoQuery& query, std::string_view base) {
    query.validate();
    std::string params;
    for (std::size_t i = 0; i < query.parameters.size(); ++i) {
        if (i) params += ',';
        params += query.parameters[i];
    }
    std::string url(base);
    url += "?&request=execute&identifier=SinglePoint&parameters=";
    url += params;
    url += "&startDate=" + format_yyyymmdd(query.start);
    url += "&endDate=" + format_yyyymmdd(query.end);
    url += "&userCommunity=SSE&tempAverage=DAILY&outputList=CSV";
    url += "&lat=" + render_coordinate(query.latitude);
    url += "&lon=" + render_coordinate(query.longitude);
    return url;
}

std::string cassette_key(std::string_view url) { return sha256_hex(url); }

std::filesystem::path cassette_path(const std::filesystem::path& dir, std::string_view url) {
    return dir / (cassette_key(url) + ".cassette");
}

void write_cassette(const std::filesystem::path& dir, std::string_view url,
                    std::string_view body) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto path = cassette_path(dir, url);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write cassette " + path.string());
    out << url << '\n' << '\n';
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("short write on cassette " + path.string());
}

std::optional<std::string> read_cassette(const std::filesystem::path& dir,
                                         std::string_view url) {
    auto path = cassette_path(dir, url);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string header;
    std::getline(in, header);  // stored URL, for human inspection only
    std::string blank;
    std::getline(in, blank);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

namespace {

struct SplitUrl {
    std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
    std::string path_and_query;    // e.g. "/cgi-bin/v1/DataAccess.py?..."
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw NetworkError("unsupported URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RawResponse fetch_daily(const GeoQuery& query, FetchMode mode,
                        const std::filesystem::path& cassette_dir,
                        std::string_view base_url) {
    std::string url = build_power_url(query, base_url);

    if (mode == FetchMode::Fixture) {
        auto body = read_cassette(cassette_dir, url);
        if (!body)
            throw FixtureMissing("no cassette " + cassette_path(cassette_dir, url).string() +
                                 " for " + url);
        return RawResponse{url, std::move(*body), Source::Fixture};
    }

    auto parts = split_url(url);
    httplib::Client client(parts.scheme_host_port);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(30, 0);
    client.set_write_timeout(30, 0);

    auto res = client.Get(parts.path_and_query);
    if (!res) throw NetworkError(to_string(res.error()) + " fetching " + url);
    if (res->status < 200 || res->status >= 300) throw HttpStatusError(res->status, url);

    write_cassette(cassette_dir, url, res->body);
    return RawResponse{url, res->body, Source::Live};
}

namespace {

using nlohmann::json;

const json* navigate(const json& root, std::initializer_list<std::string_view> keys,
                     std::string& path) {
    const json* node = &root;
    for (auto key : keys) {
        if (!node->is_object() || !node->contains(std::string(key)))
            throw ParseError(path.empty() ? std::string(key) : path + "." + std::string(key),
                             "missing object member");
        node = &node->at(std::string(key));
        path = path.empty() ? std::string(key) : path + "." + std::string(key);
    }
    return node;
}

void assign_field(DailyRecord& rec, std::string_view param, double value) {
    if (param == kParamTemperature)
        rec.t_avg = value;
    else if (param == kParamClearness)
        rec.kt = value;
    else
        rec.s_horiz = value;
}

}  // namespace

std::vector<DailyRecord> parse_power_response(const RawResponse& resp) {
    json root;
    try {
        root = json::parse(resp.body);
    } catch (const json::parse_error& e) {
        throw ParseError("(document)", e.what());
    }

    std::string path;
    const json* features = navigate(root, {"features"}, path);
    if (!features->is_array() || features->empty())
        throw ParseError("features", "expected non-empty array");
    const json& first = (*features)[0];
    path = "features[0]";
    if (!first.is_object() || !first.contains("properties"))
        throw ParseError(path + ".properties", "missing object member");
    const json& props = first.at("properties");
    path += ".properties";
    if (!props.is_object() || !props.contains("parameter"))
        throw ParseError(path + ".parameter", "missing object member");
    const json& parameter = props.at("parameter");
    path += ".parameter";
    if (!parameter.is_object()) throw ParseError(path, "expected object");

    std::map<Date, DailyRecord> by_date;
    for (std::string_view param : {kParamTemperature, kParamClearness, kParamIrradiance}) {
        std::string pname(param);
        if (!parameter.contains(pname)) continue;
        const json& series = parameter.at(pname);
        std::string series_path = path + "." + pname;
        if (!series.is_object()) throw ParseError(series_path, "expected date-keyed object");
        for (const auto& [key, value] : series.items()) {
            std::string node_path = series_path + "." + key;
            auto date = parse_yyyymmdd(key);
            if (!date) throw ParseError(node_path, "key is not a yyyymmdd date");
            if (!value.is_number()) throw ParseError(node_path, "value is not a number");
            double v = value.get<double>();
            auto& rec = by_date[*date];
            rec.date = *date;
            if (v == kMissingSentinel) continue;  // stays missing
            if (param == kParamClearness && (v < 0.0 || v > 1.0))
                throw ParseError(node_path, "clearness index outside [0, 1]");
            if (param == kParamIrradiance && v < 0.0)
                throw ParseError(node_path, "negative irradiance");
            assign_field(rec, param, v);
        }
    }

    std::vector<DailyRecord> records;
    records.reserve(by_date.size());
    for (auto& [date, rec] : by_date) records.push_back(std::move(rec));
    return records;
}

}  // namespace pvcast::power
