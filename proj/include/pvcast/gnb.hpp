#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "pvcast/dataset.hpp"
#include "pvcast/parallel.hpp"

namespace pvcast::gnb {

inline constexpr int kClassCount = data::kCategoryCount;
inline constexpr int kFeatureCount = 3;
inline constexpr int kFormatVersion = 1;

// Relative variance floor: 1e-9 of the largest pooled feature variance,
// falling back to an absolute 1e-12 when the pool itself is constant.
inline constexpr double kVarianceFloorScale = 1e-9;
inline constexpr double kVarianceFloorAbsolute = 1e-12;

struct GnbModel {
    std::array<double, kClassCount> priors{};
    std::array<std::array<double, kFeatureCount>, kClassCount> means{};
    std::array<std::array<double, kFeatureCount>, kClassCount> variances{};
    data::BinScheme bins;
    nlohmann::json meta = nlohmann::json::object();  // query echo, split config, fit timestamp

    // Throws CorruptModel when any invariant fails.
    void validate() const;
};

// Priors from class frequencies; per-class, per-feature means and population
// variances (divide by n_k), floored. Classes absent from training keep prior
// 0 and are never predicted.
GnbModel fit(std::span<const data::LabeledSample> train, const data::BinScheme& bins,
             nlohmann::json meta = nlohmann::json::object());

// log of the normal density, evaluated in log space.
double gaussian_log_pdf(double x, double mean, double variance);

// ln prior + sum of per-feature log densities; -inf for prior-0 classes.
std::array<double, kClassCount> log_joint(const GnbModel& model, const data::FeatureVector& f);

// argmax of log_joint, ties to the lower index.
int predict(const GnbModel& model, const data::FeatureVector& f);

// Softmax of log_joint via the max-shift trick; the Bayes evidence term is
// realized as this normalizer. Sums to 1 within 1e-12.
std::array<double, kClassCount> predict_proba(const GnbModel& model,
                                              const data::FeatureVector& f);

// Per-sample predictions for a whole batch. Serial is the reference path;
// Parallel runs the same loop under OpenMP.
std::vector<int> predict_batch(const GnbModel& model, std::span<const data::FeatureVector> rows,
                               ExecPolicy policy = ExecPolicy::Parallel);

// Versioned JSON document; floats carry full round-trip precision.
void save(const GnbModel& model, const std::filesystem::path& path);
GnbModel load(const std::filesystem::path& path);

nlohmann::json to_json(const GnbModel& model);
GnbModel from_json(const nlohmann::json& doc);

}  // namespace pvcast::gnb
