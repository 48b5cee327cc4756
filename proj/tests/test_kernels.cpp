#include <vector>

#include "doctest.h"
#include "pvcast/dataset.hpp"
#include "pvcast/eval.hpp"
#include "pvcast/gnb.hpp"
#include "support/synthetic_power.hpp"
#include "support/temp_dir.hpp"

// The OpenMP kernels must be bit-identical to their serial reference paths.

using namespace pvcast;

namespace {

gnb::GnbModel random_model(std::uint64_t& state) {
    gnb::GnbModel model;
    model.bins = data::BinScheme{{1.0, 2.0, 3.0, 4.0}};
    double sum = 0.0;
    for (auto& p : model.priors) {
        p = 0.05 + pvtest::uniform01(state);
        sum += p;
    }
    for (auto& p : model.priors) p /= sum;
    // renormalize exactly enough for validate()
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < model.priors.size(); ++k) acc += model.priors[k];
    model.priors.back() = 1.0 - acc;
    for (int k = 0; k < gnb::kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        for (int j = 0; j < gnb::kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            model.means[ku][ju] = 10.0 * pvtest::uniform01(state);
            model.variances[ku][ju] = 0.2 + 3.0 * pvtest::uniform01(state);
        }
    }
    return model;
}

}  // namespace

TEST_CASE("predict_batch: OpenMP equals serial on a large batch") {
    std::uint64_t state = 1;
    auto model = random_model(state);
    std::vector<data::FeatureVector> rows;
    for (int i = 0; i < 20000; ++i)
        rows.push_back({12.0 * pvtest::uniform01(state), pvtest::uniform01(state),
                        12.0 * pvtest::uniform01(state)});

    auto serial = gnb::predict_batch(model, rows, ExecPolicy::Serial);
    auto parallel = gnb::predict_batch(model, rows, ExecPolicy::Parallel);
    CHECK(serial == parallel);
}

TEST_CASE("assemble: OpenMP equals serial field by field") {
    std::uint64_t state = 2;
    std::vector<power::DailyRecord> records;
    Date d{2016, 1, 1};
    for (int i = 0; i < 5000; ++i) {
        power::DailyRecord r;
        r.date = d;
        d = next_day(d);
        if (pvtest::uniform01(state) > 0.05) r.t_avg = 30.0 * pvtest::uniform01(state);
        if (pvtest::uniform01(state) > 0.05) r.kt = pvtest::uniform01(state);
        if (pvtest::uniform01(state) > 0.05) r.s_horiz = 9.0 * pvtest::uniform01(state);
        records.push_back(r);
    }

    auto serial = data::assemble(records, 47.3, data::PanelConfig{}, solar::kMiddayHourAngleDeg,
                                 ExecPolicy::Serial);
    auto parallel = data::assemble(records, 47.3, data::PanelConfig{}, solar::kMiddayHourAngleDeg,
                                   ExecPolicy::Parallel);
    CHECK(serial.dropped == parallel.dropped);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].date == parallel.rows[i].date);
        CHECK(serial.rows[i].features.t_avg == parallel.rows[i].features.t_avg);
        CHECK(serial.rows[i].features.kt == parallel.rows[i].features.kt);
        CHECK(serial.rows[i].features.s_mod == parallel.rows[i].features.s_mod);
        CHECK(serial.rows[i].pve == parallel.rows[i].pve);
    }
}

TEST_CASE("confusion: OpenMP equals serial") {
    std::uint64_t state = 3;
    auto model = random_model(state);
    std::vector<data::LabeledSample> test;
    for (int i = 0; i < 5000; ++i) {
        data::LabeledSample s;
        s.date = Date{2017, 1, 1};
        s.features = {12.0 * pvtest::uniform01(state), pvtest::uniform01(state),
                      12.0 * pvtest::uniform01(state)};
        s.label = static_cast<int>(pvtest::uniform01(state) * 5.0) % 5;
        test.push_back(s);
    }
    auto serial = eval::confusion(model, test, ExecPolicy::Serial);
    auto parallel = eval::confusion(model, test, ExecPolicy::Parallel);
    CHECK(serial.counts == parallel.counts);
}
