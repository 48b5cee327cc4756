#include "pvcast/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include "CLI11.hpp"
#include "pvcast/dataset.hpp"
#include "pvcast/eval.hpp"
#include "pvcast/gnb.hpp"
#include "pvcast/power_client.hpp"

namespace pvcast::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : Error {
    using Error::Error;
};
struct ModelFileError : Error {
    using Error::Error;
};

struct CommonOpts {
    double lat = 0.0;
    double lon = 0.0;
    std::string start;
    std::string end;
    std::string mode = "live";
    std::string cassette_dir = "cassettes";
    std::string base_url = std::string(power::kDefaultBaseUrl);
    std::uint64_t seed = 0;
    double test_ratio = 0.35;
    double efficiency = 0.20;
    double area = 1.0;
};

Date parse_date_flag(const std::string& value, const std::string& flag) {
    auto d = parse_yyyymmdd(value);
    if (!d) throw UsageError(flag + " must be a valid yyyymmdd date, got '" + value + "'");
    return *d;
}

power::FetchMode parse_mode(const std::string& mode) {
    if (mode == "live") return power::FetchMode::Live;
    if (mode == "fixture") return power::FetchMode::Fixture;
    throw UsageError("--mode must be 'live' or 'fixture', got '" + mode + "'");
}

void check_panel_and_split(const CommonOpts& o) {
    if (!(o.test_ratio > 0.0 && o.test_ratio < 1.0))
        throw UsageError("--test-ratio must be in (0, 1)");
    if (!(o.efficiency > 0.0 && o.efficiency <= 1.0))
        throw UsageError("--efficiency must be in (0, 1]");
    if (!(o.area > 0.0)) throw UsageError("--area must be positive");
}

// Reproducible builds convention: SOURCE_DATE_EPOCH pins the recorded
// timestamp so identical runs produce identical model files.
std::string fit_timestamp() {
    std::time_t t;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("short write on " + path.string());
}

gnb::GnbModel load_model(const std::string& path) {
    try {
        return gnb::load(path);
    } catch (const IoError& e) {
        throw ModelFileError(e.what());
    } catch (const FormatVersionMismatch& e) {
        throw ModelFileError(e.what());
    } catch (const CorruptModel& e) {
        throw ModelFileError(e.what());
    }
}

std::string percent4(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f%%", 100.0 * fraction);
    return buf;
}

std::vector<power::DailyRecord> fetch_records(const CommonOpts& o, const Date& start,
                                              const Date& end) {
    power::GeoQuery query{o.lat, o.lon, start, end, power::default_parameters()};
    auto resp = power::fetch_daily(query, parse_mode(o.mode), o.cassette_dir, o.base_url);
    return power::parse_power_response(resp);
}

nlohmann::json train_meta(const CommonOpts& o, const Date& start, const Date& end) {
    nlohmann::json meta;
    meta["query"] = {{"lat", o.lat},
                     {"lon", o.lon},
                     {"start", format_yyyymmdd(start)},
                     {"end", format_yyyymmdd(end)},
                     {"parameters", power::default_parameters()}};
    meta["split"] = {{"test_ratio", o.test_ratio}, {"seed", o.seed}};
    meta["panel"] = {{"efficiency", o.efficiency}, {"area", o.area}};
    meta["fitted_at"] = fit_timestamp();
    return meta;
}

int cmd_fetch(const CommonOpts& o, std::ostream& out) {
    Date start = parse_date_flag(o.start, "--start");
    Date end = parse_date_flag(o.end, "--end");
    power::GeoQuery query{o.lat, o.lon, start, end, power::default_parameters()};
    auto resp = power::fetch_daily(query, parse_mode(o.mode), o.cassette_dir, o.base_url);
    auto records = power::parse_power_response(resp);
    std::size_t missing = 0;
    for (const auto& r : records)
        if (!r.complete()) ++missing;
    out << "url: " << resp.url << '\n';
    out << "cassette: " << power::cassette_path(o.cassette_dir, resp.url).string() << '\n';
    out << "days fetched: " << records.size() << '\n';
    out << "days with missing values: " << missing << '\n';
    return 0;
}

int cmd_train(const CommonOpts& o, const std::string& model_out, const std::string& samples_out,
              std::ostream& out) {
    check_panel_and_split(o);
    Date start = parse_date_flag(o.start, "--start");
    Date end = parse_date_flag(o.end, "--end");
    auto records = fetch_records(o, start, end);

    data::SplitConfig split_cfg{o.test_ratio, o.seed};
    data::PanelConfig panel{o.efficiency, o.area};
    auto outcome = eval::fit_on_records(records, o.lat, panel, split_cfg, ExecPolicy::Parallel,
                                        train_meta(o, start, end));

    try {
        gnb::save(outcome.model, model_out);
    } catch (const IoError& e) {
        throw ModelFileError(e.what());
    }

    if (!samples_out.empty()) {
        auto assembled = data::assemble(records, o.lat, panel);
        auto labeled = data::label_rows(assembled.rows, outcome.model.bins);
        write_text_file(samples_out, data::samples_to_csv(labeled));
        out << "samples written to " << samples_out << '\n';
    }

    out << "dropped records: " << outcome.dropped << '\n';
    out << "train samples: " << outcome.n_train << '\n';
    out << "test samples: " << outcome.n_test << '\n';
    out << "test accuracy: " << percent4(eval::accuracy(outcome.held_out)) << '\n';
    out << "model written to " << model_out << '\n';
    return 0;
}

int cmd_predict(const std::string& model_path, double t_avg, double kt, double s_mod,
                std::ostream& out) {
    if (!(kt >= 0.0 && kt <= 1.0)) throw UsageError("--kt must be in [0, 1]");
    if (!(s_mod >= 0.0)) throw UsageError("--s-mod must be non-negative");
    auto model = load_model(model_path);
    int label = gnb::predict(model, data::FeatureVector{t_avg, kt, s_mod});

    auto name = data::kCategoryNames[static_cast<std::size_t>(label)];
    const auto& e = model.bins.edges;
    char range[64];
    if (label == 0)
        std::snprintf(range, sizeof range, "<%.2f", e[0]);
    else if (label == data::kCategoryCount - 1)
        std::snprintf(range, sizeof range, ">%.2f", e[3]);
    else
        std::snprintf(range, sizeof range, "%.2f-%.2f", e[static_cast<std::size_t>(label - 1)],
                      e[static_cast<std::size_t>(label)]);
    out << name << " (" << range << " kWh)\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& model_path, bool panel_from_flags,
                 std::ostream& out) {
    check_panel_and_split(o);
    Date start = parse_date_flag(o.start, "--start");
    Date end = parse_date_flag(o.end, "--end");
    auto model = load_model(model_path);

    data::PanelConfig panel{o.efficiency, o.area};
    // Labels only line up with the stored bin edges under the training panel
    // settings, so prefer the model's own record of them.
    if (!panel_from_flags && model.meta.contains("panel")) {
        const auto& p = model.meta.at("panel");
        if (p.contains("efficiency")) panel.efficiency = p.at("efficiency").get<double>();
        if (p.contains("area")) panel.area = p.at("area").get<double>();
    }

    auto records = fetch_records(o, start, end);
    auto scored = eval::evaluate_records(model, records, o.lat, panel);

    out << eval::format_matrix(scored.cm);
    out << "predictions: " << scored.n_test << '\n';
    out << "dropped records: " << scored.dropped << '\n';
    out << "accuracy: " << percent4(eval::accuracy(scored.cm)) << '\n';
    out << "adjacent error fraction: "
        << data::render_number(eval::adjacent_error_fraction(scored.cm)) << '\n';
    return 0;
}

struct SweepOpts {
    std::vector<double> lats = {-60, -30, 40, 72};
    std::vector<double> lons = {-150, -75, 90, 140};
    std::string train_start = "20160101";
    std::string train_end = "20161231";
    std::string eval_start = "20170101";
    std::string eval_end = "20171231";
    std::string out_csv = "sweep.csv";
    std::string summary_path;
};

int cmd_sweep(const CommonOpts& o, const SweepOpts& s, std::ostream& out) {
    check_panel_and_split(o);
    eval::SweepConfig cfg;
    cfg.train_period = {parse_date_flag(s.train_start, "--train-start"),
                        parse_date_flag(s.train_end, "--train-end")};
    cfg.eval_period = {parse_date_flag(s.eval_start, "--eval-start"),
                       parse_date_flag(s.eval_end, "--eval-end")};
    cfg.mode = parse_mode(o.mode);
    cfg.cassette_dir = o.cassette_dir;
    cfg.base_url = o.base_url;
    cfg.split = {o.test_ratio, o.seed};
    cfg.panel = {o.efficiency, o.area};

    auto report = eval::sweep(s.lats, s.lons, cfg);
    write_text_file(s.out_csv, eval::report_to_csv(report));
    if (!s.summary_path.empty()) write_text_file(s.summary_path, eval::report_summary(report));

    out << "locations: " << s.lats.size() * s.lons.size() << '\n';
    out << "entries: " << report.entries.size() << '\n';
    out << "skipped: " << report.skipped.size() << '\n';
    std::map<std::string, std::pair<double, std::size_t>> by_period;
    for (const auto& e : report.entries) {
        by_period[e.period].first += e.accuracy;
        by_period[e.period].second += 1;
    }
    for (const auto& [period, acc] : by_period)
        out << "mean accuracy " << period << ": "
            << percent4(acc.first / static_cast<double>(acc.second)) << '\n';
    out << "report written to " << s.out_csv << '\n';
    return 0;
}

std::string polyline_svg(const std::vector<std::pair<Date, double>>& series,
                         const std::string& title) {
    constexpr double width = 800, height = 300, margin = 20;
    double lo = series.front().second, hi = lo;
    for (const auto& [d, v] : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    std::string points;
    for (std::size_t i = 0; i < series.size(); ++i) {
        double x = margin + (width - 2 * margin) * static_cast<double>(i) /
                                std::max<std::size_t>(series.size() - 1, 1);
        double y = height - margin - (height - 2 * margin) * (series[i].second - lo) / (hi - lo);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
        points += buf;
    }
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"300\">\n";
    svg += "  <title>" + title + "</title>\n";
    svg += "  <rect width=\"800\" height=\"300\" fill=\"white\" stroke=\"black\"/>\n";
    svg += "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"" + points +
           "\"/>\n</svg>\n";
    return svg;
}

int cmd_plot_data(const CommonOpts& o, const std::string& out_dir, bool svg, std::ostream& out) {
    Date start = parse_date_flag(o.start, "--start");
    Date end = parse_date_flag(o.end, "--end");
    auto records = fetch_records(o, start, end);
    if (records.empty()) throw EmptyDataset("no records in the requested period");

    struct Series {
        const char* file;
        std::vector<std::pair<Date, double>> points;
    };
    Series series[3] = {{"t_avg", {}}, {"kt", {}}, {"s_horiz", {}}};
    for (const auto& r : records) {
        if (r.t_avg) series[0].points.emplace_back(r.date, *r.t_avg);
        if (r.kt) series[1].points.emplace_back(r.date, *r.kt);
        if (r.s_horiz) series[2].points.emplace_back(r.date, *r.s_horiz);
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const auto& s : series) {
        if (s.points.empty()) throw EmptyDataset(std::string("no values for ") + s.file);
        std::string csv = "date,value\n";
        for (const auto& [date, value] : s.points)
            csv += format_iso(date) + ',' + data::render_number(value) + '\n';
        auto path = fs::path(out_dir) / (std::string(s.file) + ".csv");
        write_text_file(path, csv);
        out << "wrote " << path.string() << " (" << s.points.size() << " rows)\n";
        if (svg) {
            auto svg_path = fs::path(out_dir) / (std::string(s.file) + ".svg");
            write_text_file(svg_path, polyline_svg(s.points, s.file));
            out << "wrote " << svg_path.string() << '\n';
        }
    }
    return 0;
}

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool needs_coords = true) {
    if (needs_coords) {
        cmd->add_option("--lat", o.lat, "Latitude in degrees")->required();
        cmd->add_option("--lon", o.lon, "Longitude in degrees")->required();
        cmd->add_option("--start", o.start, "Period start, yyyymmdd")->required();
        cmd->add_option("--end", o.end, "Period end, yyyymmdd")->required();
    }
    cmd->add_option("--mode", o.mode, "live or fixture")->capture_default_str();
    cmd->add_option("--cassette-dir", o.cassette_dir, "Directory for response cassettes")
        ->capture_default_str();
    cmd->add_option("--base-url", o.base_url, "POWER endpoint override")->capture_default_str();
}

void add_pipeline_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "Split shuffle seed")->capture_default_str();
    cmd->add_option("--test-ratio", o.test_ratio, "Held-out fraction")->capture_default_str();
    cmd->add_option("--efficiency", o.efficiency, "Panel efficiency")->capture_default_str();
    cmd->add_option("--area", o.area, "Panel area, m2")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Location-agnostic categorical photovoltaic energy predictor"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonOpts opts;
    std::string model_path;
    std::string samples_out;
    double t_avg = 0.0, kt = 0.0, s_mod = 0.0;
    std::string out_dir = "plots";
    bool svg = false;
    SweepOpts sweep_opts;

    auto* fetch = app.add_subcommand("fetch", "Fetch a period and record a cassette");
    add_common_flags(fetch, opts);

    auto* train = app.add_subcommand("train", "Fetch, assemble, fit, and save a model");
    add_common_flags(train, opts);
    add_pipeline_flags(train, opts);
    train->add_option("--model", model_path, "Output model path")->required();
    train->add_option("--samples-out", samples_out, "Also dump the labeled samples as CSV");

    auto* predict = app.add_subcommand("predict", "Predict the category for one observation");
    predict->add_option("--model", model_path, "Trained model path")->required();
    predict->add_option("--t-avg", t_avg, "Average temperature, degC")->required();
    predict->add_option("--kt", kt, "Clearness index")->required();
    predict->add_option("--s-mod", s_mod, "Module-plane irradiance, kWh/m2")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a stored model on a period");
    add_common_flags(evaluate, opts);
    add_pipeline_flags(evaluate, opts);
    evaluate->add_option("--model", model_path, "Trained model path")->required();

    auto* sweep = app.add_subcommand("sweep", "Grid of locations, two periods, report CSV");
    add_common_flags(sweep, opts, /*needs_coords=*/false);
    add_pipeline_flags(sweep, opts);
    sweep->add_option("--lats", sweep_opts.lats, "Latitude grid")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--lons", sweep_opts.lons, "Longitude grid")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--train-start", sweep_opts.train_start, "Training period start")
        ->capture_default_str();
    sweep->add_option("--train-end", sweep_opts.train_end, "Training period end")
        ->capture_default_str();
    sweep->add_option("--eval-start", sweep_opts.eval_start, "Evaluation period start")
        ->capture_default_str();
    sweep->add_option("--eval-end", sweep_opts.eval_end, "Evaluation period end")
        ->capture_default_str();
    sweep->add_option("--out", sweep_opts.out_csv, "Report CSV path")->capture_default_str();
    sweep->add_option("--summary", sweep_opts.summary_path, "Optional text summary path");

    auto* plot = app.add_subcommand("plot-data", "Export the raw feature time series");
    add_common_flags(plot, opts);
    plot->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    plot->add_flag("--svg", svg, "Also write SVG line charts");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fetch->parsed()) return cmd_fetch(opts, out);
        if (train->parsed()) return cmd_train(opts, model_path, samples_out, out);
        if (predict->parsed()) return cmd_predict(model_path, t_avg, kt, s_mod, out);
        if (evaluate->parsed()) {
            bool panel_from_flags = evaluate->count("--efficiency") > 0 ||
                                    evaluate->count("--area") > 0;
            return cmd_evaluate(opts, model_path, panel_from_flags, out);
        }
        if (sweep->parsed()) return cmd_sweep(opts, sweep_opts, out);
        if (plot->parsed()) return cmd_plot_data(opts, out_dir, svg, out);
        err << "error: no command selected\n";
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const InvalidQuery& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NetworkError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const FixtureMissing& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const HttpStatusError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ModelFileError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        // Parse, dataset, and scoring problems are all data errors.
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace pvcast::cli
