#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "pvcast/dataset.hpp"
#include "pvcast/gnb.hpp"

using namespace pvcast;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

gnb::GnbModel bench_model() {
    gnb::GnbModel model;
    model.bins = data::BinScheme{{1.0, 2.0, 3.0, 4.0}};
    std::uint64_t state = 12;
    for (int k = 0; k < gnb::kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        model.priors[ku] = 0.2;
        for (int j = 0; j < gnb::kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            model.means[ku][ju] = 2.0 * k + uniform01(state);
            model.variances[ku][ju] = 0.5 + uniform01(state);
        }
    }
    return model;
}

std::vector<data::FeatureVector> bench_rows(std::size_t n) {
    std::vector<data::FeatureVector> rows;
    rows.reserve(n);
    std::uint64_t state = 34;
    for (std::size_t i = 0; i < n; ++i)
        rows.push_back({10.0 * uniform01(state), uniform01(state), 10.0 * uniform01(state)});
    return rows;
}

std::vector<power::DailyRecord> bench_records(std::size_t n) {
    std::vector<power::DailyRecord> records;
    records.reserve(n);
    std::uint64_t state = 56;
    Date d{2000, 1, 1};
    for (std::size_t i = 0; i < n; ++i) {
        power::DailyRecord r;
        r.date = d;
        d = next_day(d);
        r.t_avg = 30.0 * uniform01(state);
        r.kt = uniform01(state);
        r.s_horiz = 9.0 * uniform01(state);
        records.push_back(r);
    }
    return records;
}

void BM_PredictBatch(benchmark::State& state, ExecPolicy policy) {
    auto model = bench_model();
    auto rows = bench_rows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto out = gnb::predict_batch(model, rows, policy);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Assemble(benchmark::State& state, ExecPolicy policy) {
    auto records = bench_records(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto out = data::assemble(records, 47.3, data::PanelConfig{},
                                  solar::kMiddayHourAngleDeg, policy);
        benchmark::DoNotOptimize(out.rows.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_PredictBatch, serial, ExecPolicy::Serial)->Range(1 << 10, 1 << 20);
BENCHMARK_CAPTURE(BM_PredictBatch, openmp, ExecPolicy::Parallel)->Range(1 << 10, 1 << 20);
BENCHMARK_CAPTURE(BM_Assemble, serial, ExecPolicy::Serial)->Range(1 << 10, 1 << 18);
BENCHMARK_CAPTURE(BM_Assemble, openmp, ExecPolicy::Parallel)->Range(1 << 10, 1 << 18);

BENCHMARK_MAIN();
