#include "pvcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <tuple>

namespace pvcast::eval {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
        for (auto c : row) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) t += counts[k][k];
    return t;
}

ConfusionMatrix confusion(const gnb::GnbModel& model, std::span<const data::LabeledSample> test,
                          ExecPolicy policy) {
    if (test.empty()) throw EmptyTestSet("cannot score an empty test set");

    std::vector<data::FeatureVector> features;
    features.reserve(test.size());
    for (const auto& s : test) features.push_back(s.features);
    auto predicted = gnb::predict_batch(model, features, policy);

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < test.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(test[i].label)]
                   [static_cast<std::size_t>(predicted[i])];
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    auto total = cm.total();
    if (total == 0) throw EmptyMatrix("confusion matrix has no entries");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double adjacent_error_fraction(const ConfusionMatrix& cm) {
    std::uint64_t errors = 0;
    std::uint64_t adjacent = 0;
    for (std::size_t a = 0; a < cm.counts.size(); ++a) {
        for (std::size_t p = 0; p < cm.counts.size(); ++p) {
            if (a == p) continue;
            errors += cm.counts[a][p];
            if ((a > p ? a - p : p - a) == 1) adjacent += cm.counts[a][p];
        }
    }
    if (errors == 0) return 1.0;
    return static_cast<double>(adjacent) / static_cast<double>(errors);
}

std::string format_matrix(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "actual \\ predicted";
    for (auto name : data::kCategoryNames) out << '\t' << name;
    out << '\n';
    for (std::size_t a = 0; a < cm.counts.size(); ++a) {
        out << data::kCategoryNames[a];
        for (std::size_t p = 0; p < cm.counts.size(); ++p) out << '\t' << cm.counts[a][p];
        out << '\n';
    }
    return out.str();
}

std::string Period::label() const { return format_yyyymmdd(start) + "-" + format_yyyymmdd(end); }

FitOutcome fit_on_records(std::span<const power::DailyRecord> records, double latitude_deg,
                          const data::PanelConfig& panel, const data::SplitConfig& split_cfg,
                          ExecPolicy policy, nlohmann::json meta) {
    auto assembled = data::assemble(records, latitude_deg, panel,
                                    solar::kMiddayHourAngleDeg, policy);
    auto [train_rows, test_rows] = data::split(std::move(assembled.rows), split_cfg);

    std::vector<double> train_pve;
    train_pve.reserve(train_rows.size());
    for (const auto& r : train_rows) train_pve.push_back(r.pve);
    auto bins = data::fit_bins(train_pve);

    auto train = data::label_rows(train_rows, bins);
    auto test = data::label_rows(test_rows, bins);

    FitOutcome outcome;
    outcome.model = gnb::fit(train, bins, std::move(meta));
    outcome.n_train = train.size();
    outcome.n_test = test.size();
    outcome.dropped = assembled.dropped;
    outcome.held_out = confusion(outcome.model, test, policy);
    return outcome;
}

EvalOutcome evaluate_records(const gnb::GnbModel& model,
                             std::span<const power::DailyRecord> records, double latitude_deg,
                             const data::PanelConfig& panel, ExecPolicy policy) {
    auto assembled = data::assemble(records, latitude_deg, panel,
                                    solar::kMiddayHourAngleDeg, policy);
    auto samples = data::label_rows(assembled.rows, model.bins);

    EvalOutcome outcome;
    outcome.cm = confusion(model, samples, policy);
    outcome.n_test = samples.size();
    outcome.dropped = assembled.dropped;
    return outcome;
}

namespace {

struct LocationOutcome {
    std::vector<SweepEntry> entries;
    std::vector<SkippedLocation> skipped;
    std::exception_ptr failure;
};

SweepEntry make_entry(double lat, double lon, const std::string& period, std::size_t n_test,
                      const ConfusionMatrix& cm) {
    return SweepEntry{lat, lon, period, n_test, accuracy(cm), cm};
}

LocationOutcome run_location(double lat, double lon, const SweepConfig& cfg,
                             ExecPolicy inner_policy) {
    LocationOutcome out;
    const std::string train_label = cfg.train_period.label();
    const std::string eval_label = cfg.eval_period.label();
    try {
        power::GeoQuery train_query{lat, lon, cfg.train_period.start, cfg.train_period.end,
                                    power::default_parameters()};
        auto train_resp = power::fetch_daily(train_query, cfg.mode, cfg.cassette_dir,
                                             cfg.base_url);
        auto train_records = power::parse_power_response(train_resp);
        FitOutcome fit;
        try {
            fit = fit_on_records(train_records, lat, cfg.panel, cfg.split, inner_policy);
        } catch (const Error& e) {
            // Thin data (polar winters, sparse fixtures) skips the whole
            // location rather than fabricating a row.
            out.skipped.push_back({lat, lon, train_label, e.what()});
            out.skipped.push_back({lat, lon, eval_label, "training failed: no model"});
            return out;
        }
        out.entries.push_back(make_entry(lat, lon, train_label, fit.n_test, fit.held_out));

        try {
            power::GeoQuery eval_query{lat, lon, cfg.eval_period.start, cfg.eval_period.end,
                                       power::default_parameters()};
            auto eval_resp = power::fetch_daily(eval_query, cfg.mode, cfg.cassette_dir,
                                                cfg.base_url);
            auto eval_records = power::parse_power_response(eval_resp);
            auto scored = evaluate_records(fit.model, eval_records, lat, cfg.panel, inner_policy);
            out.entries.push_back(make_entry(lat, lon, eval_label, scored.n_test, scored.cm));
        } catch (const EmptyDataset& e) {
            out.skipped.push_back({lat, lon, eval_label, e.what()});
        } catch (const EmptyTestSet& e) {
            out.skipped.push_back({lat, lon, eval_label, e.what()});
        } catch (const FixtureMissing& e) {
            out.skipped.push_back({lat, lon, eval_label, e.what()});
        }
    } catch (const FixtureMissing& e) {
        out.skipped.push_back({lat, lon, train_label, e.what()});
        out.skipped.push_back({lat, lon, eval_label, e.what()});
    } catch (...) {
        out.failure = std::current_exception();
    }
    return out;
}

[[noreturn]] void rethrow_with_coordinates(std::exception_ptr ep, double lat, double lon) {
    std::string where =
        "sweep location (" + data::render_number(lat) + ", " + data::render_number(lon) + "): ";
    try {
        std::rethrow_exception(ep);
    } catch (const NetworkError& e) {
        throw NetworkError(where + e.what());
    } catch (const ParseError& e) {
        throw ParseError(e.path, where + e.what());
    } catch (const InvalidQuery& e) {
        throw InvalidQuery(where + e.what());
    } catch (const Error& e) {
        throw Error(where + e.what());
    }
    // HttpStatusError and anything else already name the failing URL.
}

}  // namespace

AxisAverages recompute_lat_averages(std::span<const SweepEntry> entries) {
    AxisAverages averages;
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> acc;
    for (const auto& e : entries) {
        auto& slot = acc[e.period][e.latitude];
        slot.first += e.accuracy;
        slot.second += 1;
    }
    for (const auto& [period, by_lat] : acc)
        for (const auto& [lat, slot] : by_lat)
            averages[period][lat] = slot.first / static_cast<double>(slot.second);
    return averages;
}

AxisAverages recompute_lon_averages(std::span<const SweepEntry> entries) {
    AxisAverages averages;
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> acc;
    for (const auto& e : entries) {
        auto& slot = acc[e.period][e.longitude];
        slot.first += e.accuracy;
        slot.second += 1;
    }
    for (const auto& [period, by_lon] : acc)
        for (const auto& [lon, slot] : by_lon)
            averages[period][lon] = slot.first / static_cast<double>(slot.second);
    return averages;
}

SweepReport sweep(std::span<const double> latitudes, std::span<const double> longitudes,
                  const SweepConfig& cfg) {
    std::vector<std::pair<double, double>> grid;
    grid.reserve(latitudes.size() * longitudes.size());
    for (double lat : latitudes)
        for (double lon : longitudes) grid.emplace_back(lat, lon);

    std::vector<LocationOutcome> outcomes(grid.size());
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    if (cfg.policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            auto [lat, lon] = grid[static_cast<std::size_t>(i)];
            outcomes[static_cast<std::size_t>(i)] =
                run_location(lat, lon, cfg, ExecPolicy::Serial);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            auto [lat, lon] = grid[static_cast<std::size_t>(i)];
            outcomes[static_cast<std::size_t>(i)] =
                run_location(lat, lon, cfg, ExecPolicy::Serial);
        }
    }

    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i].failure)
            rethrow_with_coordinates(outcomes[i].failure, grid[i].first, grid[i].second);

    SweepReport report;
    for (auto& o : outcomes) {
        for (auto& e : o.entries) report.entries.push_back(std::move(e));
        for (auto& s : o.skipped) report.skipped.push_back(std::move(s));
    }
    auto by_key = [](const auto& a, const auto& b) {
        return std::tie(a.period, a.latitude, a.longitude) <
               std::tie(b.period, b.latitude, b.longitude);
    };
    std::sort(report.entries.begin(), report.entries.end(), by_key);
    std::sort(report.skipped.begin(), report.skipped.end(), by_key);
    report.lat_averages = recompute_lat_averages(report.entries);
    report.lon_averages = recompute_lon_averages(report.entries);
    return report;
}

std::string report_to_csv(const SweepReport& report) {
    std::string out = "lat,lon,period,n_test,accuracy\n";
    for (const auto& e : report.entries) {
        out += data::render_number(e.latitude) + ',' + data::render_number(e.longitude) + ',' +
               e.period + ',' + std::to_string(e.n_test) + ',' + data::render_number(e.accuracy) +
               '\n';
    }
    for (const auto& s : report.skipped) {
        out += data::render_number(s.latitude) + ',' + data::render_number(s.longitude) + ',' +
               s.period + ",0,skipped\n";
    }
    return out;
}

std::string report_summary(const SweepReport& report) {
    std::ostringstream out;
    for (const auto& e : report.entries) {
        out << "location (" << data::render_number(e.latitude) << ", "
            << data::render_number(e.longitude) << ") period " << e.period
            << ": n_test=" << e.n_test;
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.4f%%", 100.0 * e.accuracy);
        out << " accuracy=" << acc << '\n' << format_matrix(e.cm) << '\n';
    }
    for (const auto& s : report.skipped)
        out << "location (" << data::render_number(s.latitude) << ", "
            << data::render_number(s.longitude) << ") period " << s.period
            << ": skipped (" << s.reason << ")\n";
    for (const auto& [period, by_lat] : report.lat_averages)
        for (const auto& [lat, avg] : by_lat)
            out << "average accuracy, latitude " << data::render_number(lat) << ", period "
                << period << ": " << data::render_number(avg) << '\n';
    for (const auto& [period, by_lon] : report.lon_averages)
        for (const auto& [lon, avg] : by_lon)
            out << "average accuracy, longitude " << data::render_number(lon) << ", period "
                << period << ": " << data::render_number(avg) << '\n';
    return out.str();
}

}  // namespace pvcast::eval
