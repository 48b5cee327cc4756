#include "pvcast/gnb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>
#include <vector>

namespace pvcast::gnb {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void GnbModel::validate() const {
    double prior_sum = 0.0;
    for (double p : priors) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw CorruptModel("negative or non-finite prior");
        prior_sum += p;
    }
    if (std::abs(prior_sum - 1.0) > 1e-12)
        throw CorruptModel("priors sum to " + std::to_string(prior_sum) + ", expected 1");
    for (const auto& row : means)
        for (double m : row)
            if (!std::isfinite(m)) throw CorruptModel("non-finite mean");
    for (const auto& row : variances)
        for (double v : row)
            if (!(v > 0.0) || !std::isfinite(v)) throw CorruptModel("variance not positive");
    bins.validate();
}

GnbModel fit(std::span<const data::LabeledSample> train_in, const data::BinScheme& bins,
             nlohmann::json meta) {
    if (train_in.empty()) throw EmptyTrainingSet("cannot fit on an empty training set");
    bins.validate();

    // Accumulate in a canonical order so a shuffled training set fits to the
    // bit-identical model.
    std::vector<data::LabeledSample> train(train_in.begin(), train_in.end());
    std::sort(train.begin(), train.end(), [](const auto& a, const auto& b) {
        return std::tie(a.label, a.date, a.features.t_avg, a.features.kt, a.features.s_mod) <
               std::tie(b.label, b.date, b.features.t_avg, b.features.kt, b.features.s_mod);
    });

    const auto n = static_cast<double>(train.size());
    std::array<std::size_t, kClassCount> counts{};
    std::array<std::array<double, kFeatureCount>, kClassCount> sums{};
    for (const auto& s : train) {
        ++counts[static_cast<std::size_t>(s.label)];
        for (int j = 0; j < kFeatureCount; ++j)
            sums[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(j)] +=
                s.features[static_cast<std::size_t>(j)];
    }

    GnbModel model;
    model.bins = bins;
    model.meta = std::move(meta);
    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        model.priors[ku] = static_cast<double>(counts[ku]) / n;
        for (int j = 0; j < kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            model.means[ku][ju] = counts[ku] ? sums[ku][ju] / static_cast<double>(counts[ku]) : 0.0;
        }
    }

    // Population variances, per class and pooled over the whole training set.
    std::array<double, kFeatureCount> pooled_mean{};
    for (const auto& s : train)
        for (int j = 0; j < kFeatureCount; ++j)
            pooled_mean[static_cast<std::size_t>(j)] += s.features[static_cast<std::size_t>(j)];
    for (auto& m : pooled_mean) m /= n;

    std::array<double, kFeatureCount> pooled_var{};
    std::array<std::array<double, kFeatureCount>, kClassCount> sq_dev{};
    for (const auto& s : train) {
        auto ku = static_cast<std::size_t>(s.label);
        for (int j = 0; j < kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            double x = s.features[ju];
            double dc = x - model.means[ku][ju];
            sq_dev[ku][ju] += dc * dc;
            double dp = x - pooled_mean[ju];
            pooled_var[ju] += dp * dp;
        }
    }
    double max_pooled = 0.0;
    for (double v : pooled_var) max_pooled = std::max(max_pooled, v / n);
    double floor = max_pooled > 0.0 ? kVarianceFloorScale * max_pooled : kVarianceFloorAbsolute;

    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        for (int j = 0; j < kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            double var = counts[ku] ? sq_dev[ku][ju] / static_cast<double>(counts[ku]) : 0.0;
            model.variances[ku][ju] = std::max(var, floor);
        }
    }

    model.validate();
    return model;
}

double gaussian_log_pdf(double x, double mean, double variance) {
    double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

std::array<double, kClassCount> log_joint(const GnbModel& model, const data::FeatureVector& f) {
    std::array<double, kClassCount> out{};
    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        if (model.priors[ku] <= 0.0) {
            out[ku] = kNegInf;
            continue;
        }
        double lj = std::log(model.priors[ku]);
        for (int j = 0; j < kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            lj += gaussian_log_pdf(f[ju], model.means[ku][ju], model.variances[ku][ju]);
        }
        out[ku] = lj;
    }
    return out;
}

int predict(const GnbModel& model, const data::FeatureVector& f) {
    auto lj = log_joint(model, f);
    int best = 0;
    for (int k = 1; k < kClassCount; ++k)
        if (lj[static_cast<std::size_t>(k)] > lj[static_cast<std::size_t>(best)]) best = k;
    return best;
}

std::array<double, kClassCount> predict_proba(const GnbModel& model,
                                              const data::FeatureVector& f) {
    auto lj = log_joint(model, f);
    double mx = kNegInf;
    for (double v : lj) mx = std::max(mx, v);
    std::array<double, kClassCount> out{};
    double sum = 0.0;
    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        out[ku] = lj[ku] == kNegInf ? 0.0 : std::exp(lj[ku] - mx);
        sum += out[ku];
    }
    for (auto& p : out) p /= sum;
    return out;
}

std::vector<int> predict_batch(const GnbModel& model, std::span<const data::FeatureVector> rows,
                               ExecPolicy policy) {
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
    std::vector<int> out(rows.size());
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = predict(model, rows[static_cast<std::size_t>(i)]);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = predict(model, rows[static_cast<std::size_t>(i)]);
    }
    return out;
}

nlohmann::json to_json(const GnbModel& model) {
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["priors"] = model.priors;
    doc["means"] = model.means;
    doc["variances"] = model.variances;
    doc["bin_edges"] = model.bins.edges;
    doc["bin_names"] = data::kCategoryNames;
    doc["meta"] = model.meta;
    return doc;
}

namespace {

template <typename T>
T checked(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) throw CorruptModel(std::string("missing key ") + key);
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel(std::string("bad value for ") + key + ": " + e.what());
    }
}

}  // namespace

GnbModel from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw CorruptModel("model document is not an object");
    auto version = checked<int>(doc, "format_version");
    if (version != kFormatVersion)
        throw FormatVersionMismatch("model format_version " + std::to_string(version) +
                                    ", expected " + std::to_string(kFormatVersion));

    GnbModel model;
    model.priors = checked<std::array<double, kClassCount>>(doc, "priors");
    model.means = checked<std::array<std::array<double, kFeatureCount>, kClassCount>>(doc, "means");
    model.variances =
        checked<std::array<std::array<double, kFeatureCount>, kClassCount>>(doc, "variances");
    model.bins.edges = checked<std::array<double, 4>>(doc, "bin_edges");
    auto names = checked<std::array<std::string, kClassCount>>(doc, "bin_names");
    for (int k = 0; k < kClassCount; ++k)
        if (names[static_cast<std::size_t>(k)] != data::kCategoryNames[static_cast<std::size_t>(k)])
            throw CorruptModel("unexpected bin name '" + names[static_cast<std::size_t>(k)] + "'");
    if (doc.contains("meta")) model.meta = doc.at("meta");
    model.validate();
    return model;
}

void save(const GnbModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json(model).dump(2) << '\n';
    if (!out) throw IoError("short write on " + path.string());
}

GnbModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptModel(std::string("model file does not parse: ") + e.what());
    }
    return from_json(doc);
}

}  // namespace pvcast::gnb
