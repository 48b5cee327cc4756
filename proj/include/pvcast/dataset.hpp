#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvcast/dates.hpp"
#include "pvcast/errors.hpp"
#include "pvcast/parallel.hpp"
#include "pvcast/power_client.hpp"
#include "pvcast/solar_geometry.hpp"

namespace pvcast::data {

inline constexpr int kCategoryCount = 5;

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "very low", "low", "moderate", "high", "very high"};

struct FeatureVector {
    double t_avg = 0.0;  // degC
    double kt = 0.0;     // [0, 1]
    double s_mod = 0.0;  // kWh/m2/day, module plane

    double operator[](std::size_t i) const { return i == 0 ? t_avg : i == 1 ? kt : s_mod; }
};

struct AssembledRow {
    Date date;
    FeatureVector features;
    double pve = 0.0;  // kWh
};

struct LabeledSample {
    Date date;
    FeatureVector features;
    double pve = 0.0;
    int label = 0;  // 0..4
};

// Five ordered categories, four interior edges fit on training targets.
struct BinScheme {
    std::array<double, 4> edges{};  // strictly increasing, kWh

    void validate() const;  // throws CorruptModel
};

struct SplitConfig {
    double test_ratio = 0.35;
    std::uint64_t seed = 0;
};

struct PanelConfig {
    double efficiency = 0.20;  // (0, 1]
    double area = 1.0;         // m2, > 0
};

struct AssembleResult {
    std::vector<AssembledRow> rows;  // date order preserved
    std::size_t dropped = 0;         // records eliminated for missing values
};

// Drops records with any missing field, converts horizontal irradiance to the
// module plane at the given hour angle, and derives pve = s_mod * eff * area.
AssembleResult assemble(std::span<const power::DailyRecord> records, double latitude_deg,
                        const PanelConfig& panel,
                        double hour_angle_deg = solar::kMiddayHourAngleDeg,
                        ExecPolicy policy = ExecPolicy::Parallel);

// Empirical 20/40/60/80 percentiles with linear interpolation between order
// statistics (index h = (n-1)p on the sorted values).
BinScheme fit_bins(std::span<const double> pve_values);

// Bin index i with edges[i-1] < pve <= edges[i]; edge values go to the lower bin.
int apply_bins(const BinScheme& scheme, double pve);

std::vector<LabeledSample> label_rows(std::span<const AssembledRow> rows,
                                      const BinScheme& scheme);

// Seeded Fisher-Yates (std::mt19937_64, identical streams on every platform);
// the first ceil(N * (1 - ratio)) shuffled samples form the training set.
// Works on assembled rows (so bin edges can be fit on the training side only)
// as well as on labeled samples.
template <typename Sample>
std::pair<std::vector<Sample>, std::vector<Sample>> split(std::vector<Sample> samples,
                                                          const SplitConfig& cfg);

extern template std::pair<std::vector<AssembledRow>, std::vector<AssembledRow>> split(
    std::vector<AssembledRow>, const SplitConfig&);
extern template std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split(
    std::vector<LabeledSample>, const SplitConfig&);

// CSV with header date,t_avg,kt,s_mod,pve,label; ISO dates, '.' decimals.
std::string samples_to_csv(std::span<const LabeledSample> samples);

// Shortest decimal rendering that round-trips, shared by the CSV writers.
std::string render_number(double value);

}  // namespace pvcast::data
