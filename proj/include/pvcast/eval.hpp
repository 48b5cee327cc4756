#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pvcast/dataset.hpp"
#include "pvcast/gnb.hpp"
#include "pvcast/parallel.hpp"

namespace pvcast::eval {

// Rows are actual labels, columns are predicted labels.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, data::kCategoryCount>, data::kCategoryCount> counts{};

    std::uint64_t total() const;
    std::uint64_t trace() const;
};

ConfusionMatrix confusion(const gnb::GnbModel& model, std::span<const data::LabeledSample> test,
                          ExecPolicy policy = ExecPolicy::Parallel);

// trace / total: the multiclass reading of (TP+TN)/(TP+TN+FP+FN).
double accuracy(const ConfusionMatrix& cm);

// Among misclassified samples, the fraction landing in a neighboring
// category. 1.0 by convention when there are no errors.
double adjacent_error_fraction(const ConfusionMatrix& cm);

std::string format_matrix(const ConfusionMatrix& cm);

struct Period {
    Date start;
    Date end;

    std::string label() const;  // "20160101-20161231"
};

// records -> clean rows -> split -> bins on the training side -> GNB ->
// held-out confusion. The one train path shared by the CLI and the sweep.
struct FitOutcome {
    gnb::GnbModel model;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t dropped = 0;
    ConfusionMatrix held_out;
};

FitOutcome fit_on_records(std::span<const power::DailyRecord> records, double latitude_deg,
                          const data::PanelConfig& panel, const data::SplitConfig& split_cfg,
                          ExecPolicy policy = ExecPolicy::Parallel,
                          nlohmann::json meta = nlohmann::json::object());

// Labels fresh records with the model's stored bin edges (never refit) and
// scores them.
struct EvalOutcome {
    ConfusionMatrix cm;
    std::size_t n_test = 0;
    std::size_t dropped = 0;
};

EvalOutcome evaluate_records(const gnb::GnbModel& model,
                             std::span<const power::DailyRecord> records, double latitude_deg,
                             const data::PanelConfig& panel,
                             ExecPolicy policy = ExecPolicy::Parallel);

struct SweepEntry {
    double latitude = 0.0;
    double longitude = 0.0;
    std::string period;
    std::size_t n_test = 0;
    double accuracy = 0.0;
    ConfusionMatrix cm;
};

struct SkippedLocation {
    double latitude = 0.0;
    double longitude = 0.0;
    std::string period;
    std::string reason;
};

struct SweepConfig {
    Period train_period;
    Period eval_period;
    power::FetchMode mode = power::FetchMode::Fixture;
    std::filesystem::path cassette_dir;
    std::string base_url = std::string(power::kDefaultBaseUrl);
    data::SplitConfig split;
    data::PanelConfig panel;
    ExecPolicy policy = ExecPolicy::Parallel;
};

// Axis averages, one map per period; plain arithmetic mean over the entries
// sharing the axis value, accumulated in sorted-entry order.
using AxisAverages = std::map<std::string, std::map<double, double>>;

struct SweepReport {
    std::vector<SweepEntry> entries;  // sorted by (period, latitude, longitude)
    std::vector<SkippedLocation> skipped;
    AxisAverages lat_averages;
    AxisAverages lon_averages;
};

// Every (lat, lon) grid point is trained on train_period, scored on its
// held-out split and on eval_period with the stored edges. Locations with too
// little data are reported as skipped; other failures propagate with the
// coordinates attached. Grid points run concurrently under the Parallel
// policy; the report is sorted afterwards, so output never depends on
// scheduling.
SweepReport sweep(std::span<const double> latitudes, std::span<const double> longitudes,
                  const SweepConfig& cfg);

AxisAverages recompute_lat_averages(std::span<const SweepEntry> entries);
AxisAverages recompute_lon_averages(std::span<const SweepEntry> entries);

// lat,lon,period,n_test,accuracy; skipped locations keep their row with
// "skipped" in the accuracy column.
std::string report_to_csv(const SweepReport& report);

// Human-readable summary including per-location matrices.
std::string report_summary(const SweepReport& report);

}  // namespace pvcast::eval
