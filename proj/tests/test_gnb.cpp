#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "pvcast/gnb.hpp"
#include "support/gnb_oracle.hpp"
#include "support/synthetic_power.hpp"
#include "support/temp_dir.hpp"

using namespace pvcast;
using namespace pvcast::data;
using namespace pvcast::gnb;

namespace {

BinScheme toy_bins() { return BinScheme{{1.0, 2.0, 3.0, 4.0}}; }

LabeledSample sample(int label, double a, double b, double c) {
    LabeledSample s;
    s.date = Date{2016, 1, 1};
    s.features = {a, b, c};
    s.pve = 0.5;
    s.label = label;
    return s;
}

// Deterministic random dataset: n samples, class_count classes in use.
std::vector<LabeledSample> random_dataset(std::uint64_t& state, std::size_t n, int class_count) {
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(pvtest::uniform01(state) * class_count);
        label = std::min(label, class_count - 1);
        double base = 2.0 * label;
        out.push_back(sample(label, base + 3.0 * pvtest::uniform01(state),
                             pvtest::uniform01(state),
                             base + 2.0 * pvtest::uniform01(state)));
    }
    // fit requires at least one sample per represented class; any multiset is
    // fine, this just keeps instances non-empty.
    if (out.empty()) out.push_back(sample(0, 0.1, 0.2, 0.3));
    return out;
}

FeatureVector random_features(std::uint64_t& state) {
    return {10.0 * pvtest::uniform01(state), pvtest::uniform01(state),
            10.0 * pvtest::uniform01(state)};
}

}  // namespace

TEST_CASE("fit computes two-point class statistics exactly") {
    std::vector<LabeledSample> train = {sample(2, 1, 1, 1), sample(2, 3, 3, 3)};
    auto model = fit(train, toy_bins());
    CHECK(model.priors[2] == 1.0);
    for (int j = 0; j < kFeatureCount; ++j) {
        CHECK(model.means[2][static_cast<std::size_t>(j)] == 2.0);
        CHECK(model.variances[2][static_cast<std::size_t>(j)] == 1.0);
    }
    for (int k : {0, 1, 3, 4}) CHECK(model.priors[static_cast<std::size_t>(k)] == 0.0);
}

TEST_CASE("single-class training always predicts that class") {
    std::vector<LabeledSample> train = {sample(3, 1, 0.4, 2), sample(3, 2, 0.5, 3),
                                        sample(3, 3, 0.6, 4)};
    auto model = fit(train, toy_bins());
    CHECK(model.priors[3] == 1.0);
    std::uint64_t state = 17;
    for (int i = 0; i < 50; ++i) CHECK(predict(model, random_features(state)) == 3);
}

TEST_CASE("fit matches an independent two-pass computation") {
    std::uint64_t state = 2024;
    auto train = random_dataset(state, 50, 5);
    auto model = fit(train, toy_bins());

    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        std::vector<const LabeledSample*> members;
        for (const auto& s : train)
            if (s.label == k) members.push_back(&s);
        if (members.empty()) {
            CHECK(model.priors[ku] == 0.0);
            continue;
        }
        CHECK(model.priors[ku] ==
              doctest::Approx(static_cast<double>(members.size()) / train.size())
                  .epsilon(1e-15));
        for (int j = 0; j < kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            long double mean = 0.0L;
            for (auto* s : members) mean += s->features[ju];
            mean /= members.size();
            long double var = 0.0L;
            for (auto* s : members) {
                long double d = s->features[ju] - mean;
                var += d * d;
            }
            var /= members.size();
            CHECK(model.means[ku][ju] == doctest::Approx((double)mean).epsilon(1e-10));
            CHECK(model.variances[ku][ju] == doctest::Approx((double)var).epsilon(1e-10));
        }
    }
}

TEST_CASE("fit is order-independent") {
    std::uint64_t state = 31;
    auto train = random_dataset(state, 80, 4);
    auto model_a = fit(train, toy_bins());

    // deterministic permutation
    for (std::size_t i = train.size() - 1; i > 0; --i)
        std::swap(train[i], train[pvtest::splitmix64(state) % (i + 1)]);
    auto model_b = fit(train, toy_bins());

    CHECK(model_a.priors == model_b.priors);
    CHECK(model_a.means == model_b.means);
    CHECK(model_a.variances == model_b.variances);
}

TEST_CASE("constant features survive through the variance floor") {
    std::vector<LabeledSample> train = {sample(1, 5, 0.5, 2), sample(1, 5, 0.5, 2),
                                        sample(2, 7, 0.6, 3)};
    auto model = fit(train, toy_bins());
    for (const auto& row : model.variances)
        for (double v : row) CHECK(v > 0.0);
    CHECK(std::isfinite(gaussian_log_pdf(5.0, model.means[1][0], model.variances[1][0])));
}

TEST_CASE("fit rejects an empty training set") {
    std::vector<LabeledSample> none;
    CHECK_THROWS_AS(fit(none, toy_bins()), EmptyTrainingSet);
}

TEST_CASE("gaussian_log_pdf analytic anchors") {
    CHECK(gaussian_log_pdf(0.0, 0.0, 1.0) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
    CHECK(std::abs(gaussian_log_pdf(1.5, 1.5, 1.0 / (2.0 * 3.14159265358979323846))) < 1e-12);
    CHECK(gaussian_log_pdf(2.0, 0.0, 4.0) ==
          doctest::Approx(-2.112085713764618).epsilon(1e-12));
}

TEST_CASE("gaussian_log_pdf is exactly symmetric around the mean") {
    // dyadic offsets keep mu + d and mu - d exact, so the symmetry must be
    // bitwise
    std::uint64_t state = 3;
    for (int i = 0; i < 1000; ++i) {
        double mu = static_cast<double>(static_cast<int>(pvtest::uniform01(state) * 2048) - 1024) /
                    64.0;
        double var = 0.01 + 5.0 * pvtest::uniform01(state);
        double d = static_cast<double>(pvtest::splitmix64(state) % 65536) / 256.0;
        CHECK(gaussian_log_pdf(mu + d, mu, var) == gaussian_log_pdf(mu - d, mu, var));
    }
}

TEST_CASE("log_joint symmetry and prior-0 classes") {
    GnbModel model;
    model.bins = toy_bins();
    for (int k = 0; k < kClassCount; ++k) {
        model.priors[static_cast<std::size_t>(k)] = 0.2;
        model.means[static_cast<std::size_t>(k)] = {1.0, 2.0, 3.0};
        model.variances[static_cast<std::size_t>(k)] = {1.0, 1.0, 1.0};
    }
    auto lj = log_joint(model, {0.5, 0.5, 0.5});
    for (int k = 1; k < kClassCount; ++k)
        CHECK(lj[static_cast<std::size_t>(k)] == lj[0]);

    model.priors = {0.5, 0.5, 0.0, 0.0, 0.0};
    auto lj2 = log_joint(model, {0.5, 0.5, 0.5});
    CHECK(lj2[2] == -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(lj2[0]));
}

TEST_CASE("log_joint matches the product-form oracle") {
    std::uint64_t state = 555;
    for (int i = 0; i < 200; ++i) {
        auto train = random_dataset(state, 40, 5);
        auto model = fit(train, toy_bins());
        auto f = random_features(state);
        auto lj = log_joint(model, f);
        auto oracle = pvtest::oracle_joint(model, f);
        for (int k = 0; k < kClassCount; ++k) {
            auto ku = static_cast<std::size_t>(k);
            if (model.priors[ku] == 0.0) continue;
            double direct = static_cast<double>(oracle[ku]);
            CHECK(std::exp(lj[ku]) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("predict picks the on-mean class and breaks ties low") {
    GnbModel model;
    model.bins = toy_bins();
    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        model.priors[ku] = 0.2;
        model.means[ku] = {100.0 * k, 100.0 * k, 100.0 * k};
        model.variances[ku] = {1.0, 1.0, 1.0};
    }
    CHECK(predict(model, {300.0, 300.0, 300.0}) == 3);

    // exact two-way tie: identical classes 0 and 1
    model.means[1] = model.means[0];
    CHECK(predict(model, {0.0, 0.0, 0.0}) == 0);
}

TEST_CASE("argmax is invariant under a constant shift of all log joints") {
    std::uint64_t state = 77;
    for (int i = 0; i < 200; ++i) {
        auto train = random_dataset(state, 30, 5);
        auto model = fit(train, toy_bins());
        auto f = random_features(state);
        auto lj = log_joint(model, f);
        double c = 50.0 * (pvtest::uniform01(state) - 0.5);
        auto argmax = [](const std::array<double, kClassCount>& v) {
            int best = 0;
            for (int k = 1; k < kClassCount; ++k)
                if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
            return best;
        };
        auto shifted = lj;
        for (auto& v : shifted) v += c;
        CHECK(argmax(lj) == argmax(shifted));
        CHECK(predict(model, f) == argmax(lj));
    }
}

TEST_CASE("predict_proba is a normalized posterior") {
    GnbModel symmetric;
    symmetric.bins = toy_bins();
    for (int k = 0; k < kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        symmetric.priors[ku] = 0.2;
        symmetric.means[ku] = {0.0, 0.0, 0.0};
        symmetric.variances[ku] = {1.0, 1.0, 1.0};
    }
    auto proba = predict_proba(symmetric, {0.3, -0.4, 1.0});
    for (double p : proba) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));

    symmetric.priors = {0.5, 0.5, 0.0, 0.0, 0.0};
    auto proba2 = predict_proba(symmetric, {0.3, -0.4, 1.0});
    CHECK(proba2[2] == 0.0);

    std::uint64_t state = 404;
    for (int i = 0; i < 200; ++i) {
        auto train = random_dataset(state, 60, 5);
        auto model = fit(train, toy_bins());
        auto f = random_features(state);
        auto proba3 = predict_proba(model, f);
        double sum = 0.0;
        for (double p : proba3) sum += p;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        auto oracle = pvtest::oracle_posteriors(model, f);
        for (std::size_t k = 0; k < proba3.size(); ++k)
            CHECK(proba3[k] == doctest::Approx(oracle[k]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("save/load round trip reproduces the model bit for bit") {
    std::uint64_t state = 1234;
    auto train = random_dataset(state, 64, 5);
    nlohmann::json meta = {{"query", {{"lat", 38.499}, {"lon", 43.365}}},
                           {"fitted_at", "2026-01-01T00:00:00Z"}};
    auto model = fit(train, toy_bins(), meta);

    pvtest::TempDir dir("model");
    auto path = dir.path() / "model.json";
    save(model, path);
    auto loaded = load(path);

    CHECK(loaded.priors == model.priors);
    CHECK(loaded.means == model.means);
    CHECK(loaded.variances == model.variances);
    CHECK(loaded.bins.edges == model.bins.edges);
    CHECK(loaded.meta == model.meta);

    // saving the loaded model gives identical bytes
    auto path2 = dir.path() / "model2.json";
    save(loaded, path2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("load rejects broken model files") {
    pvtest::TempDir dir("broken");
    auto path = dir.path() / "model.json";

    CHECK_THROWS_AS(load(dir.path() / "missing.json"), IoError);

    std::uint64_t state = 9;
    auto model = fit(random_dataset(state, 30, 5), toy_bins());
    save(model, path);

    // truncated
    {
        std::ifstream in(path, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary);
        out << text.substr(0, text.size() / 2);
    }
    CHECK_THROWS_AS(load(path), CorruptModel);

    // hand-edited zero variance
    save(model, path);
    {
        std::ifstream in(path, std::ios::binary);
        auto doc = nlohmann::json::parse(in);
        doc["variances"][0][0] = 0.0;
        std::ofstream out(path, std::ios::binary);
        out << doc.dump(2);
    }
    CHECK_THROWS_AS(load(path), CorruptModel);

    // wrong format version
    save(model, path);
    {
        std::ifstream in(path, std::ios::binary);
        auto doc = nlohmann::json::parse(in);
        doc["format_version"] = kFormatVersion + 1;
        std::ofstream out(path, std::ios::binary);
        out << doc.dump(2);
    }
    CHECK_THROWS_AS(load(path), FormatVersionMismatch);

    // priors that no longer sum to one
    save(model, path);
    {
        std::ifstream in(path, std::ios::binary);
        auto doc = nlohmann::json::parse(in);
        doc["priors"][0] = 0.9;
        doc["priors"][1] = 0.9;
        std::ofstream out(path, std::ios::binary);
        out << doc.dump(2);
    }
    CHECK_THROWS_AS(load(path), CorruptModel);
}

TEST_CASE("predict agrees with the brute-force oracle on random instances") {
    std::uint64_t state = 31337;
    for (int i = 0; i < 100; ++i) {
        int classes = 2 + static_cast<int>(pvtest::uniform01(state) * 4.0);
        classes = std::min(classes, 5);
        auto n = static_cast<std::size_t>(10 + pvtest::uniform01(state) * 90.0);
        auto train = random_dataset(state, n, classes);
        auto model = fit(train, toy_bins());
        for (int q = 0; q < 5; ++q) {
            auto f = random_features(state);
            CHECK(predict(model, f) == pvtest::oracle_predict(model, f));
        }
    }
}
