#include "pvcast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>

#include "pvcast/solar_geometry.hpp"

namespace pvcast::data {

void BinScheme::validate() const {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i] < edges[i + 1]))
            throw CorruptModel("bin edges are not strictly increasing");
    for (double e : edges)
        if (!std::isfinite(e)) throw CorruptModel("non-finite bin edge");
}

AssembleResult assemble(std::span<const power::DailyRecord> records, double latitude_deg,
                        const PanelConfig& panel, double hour_angle_deg, ExecPolicy policy) {
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    std::vector<AssembledRow> staged(records.size());
    std::vector<char> keep(records.size(), 0);

    auto compute = [&](std::ptrdiff_t i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        if (!rec.complete()) return;
        auto pos = solar::position_at(latitude_deg, rec.date, hour_angle_deg);
        double s_mod = solar::module_irradiance(*rec.s_horiz, pos.elevation);
        AssembledRow row;
        row.date = rec.date;
        row.features = FeatureVector{*rec.t_avg, *rec.kt, s_mod};
        row.pve = s_mod * panel.efficiency * panel.area;
        staged[static_cast<std::size_t>(i)] = row;
        keep[static_cast<std::size_t>(i)] = 1;
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) compute(i);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) compute(i);
    }

    AssembleResult result;
    result.rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (keep[i])
            result.rows.push_back(staged[i]);
        else
            ++result.dropped;
    }
    if (result.rows.empty()) throw EmptyDataset("no complete daily records to assemble");
    return result;
}

namespace {

double percentile_linear(const std::vector<double>& sorted, double p) {
    const auto n = sorted.size();
    double h = static_cast<double>(n - 1) * p;
    auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BinScheme fit_bins(std::span<const double> pve_values) {
    std::set<double> distinct(pve_values.begin(), pve_values.end());
    if (distinct.size() < kCategoryCount)
        throw DegenerateTarget("need at least 5 distinct pve values, got " +
                               std::to_string(distinct.size()));

    std::vector<double> sorted(pve_values.begin(), pve_values.end());
    std::sort(sorted.begin(), sorted.end());

    BinScheme scheme;
    scheme.edges = {percentile_linear(sorted, 0.2), percentile_linear(sorted, 0.4),
                    percentile_linear(sorted, 0.6), percentile_linear(sorted, 0.8)};
    for (std::size_t i = 0; i + 1 < scheme.edges.size(); ++i)
        if (!(scheme.edges[i] < scheme.edges[i + 1]))
            throw DegenerateTarget("quintile edges collide; target distribution too clumped");
    return scheme;
}

int apply_bins(const BinScheme& scheme, double pve) {
    for (std::size_t i = 0; i < scheme.edges.size(); ++i)
        if (pve <= scheme.edges[i]) return static_cast<int>(i);
    return kCategoryCount - 1;
}

std::vector<LabeledSample> label_rows(std::span<const AssembledRow> rows,
                                      const BinScheme& scheme) {
    std::vector<LabeledSample> samples;
    samples.reserve(rows.size());
    for (const auto& row : rows)
        samples.push_back({row.date, row.features, row.pve, apply_bins(scheme, row.pve)});
    return samples;
}

template <typename Sample>
std::pair<std::vector<Sample>, std::vector<Sample>> split(std::vector<Sample> samples,
                                                          const SplitConfig& cfg) {
    const std::size_t n = samples.size();
    if (n < 10) throw TooFewSamples("need at least 10 samples to split, got " + std::to_string(n));

    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        auto j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(samples[i], samples[j]);
    }

    auto train_count =
        static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - cfg.test_ratio)));
    train_count = std::min(train_count, n);

    std::vector<Sample> train(samples.begin(),
                              samples.begin() + static_cast<std::ptrdiff_t>(train_count));
    std::vector<Sample> test(samples.begin() + static_cast<std::ptrdiff_t>(train_count),
                             samples.end());
    return {std::move(train), std::move(test)};
}

template std::pair<std::vector<AssembledRow>, std::vector<AssembledRow>> split(
    std::vector<AssembledRow>, const SplitConfig&);
template std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split(
    std::vector<LabeledSample>, const SplitConfig&);

std::string render_number(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string samples_to_csv(std::span<const LabeledSample> samples) {
    std::string out = "date,t_avg,kt,s_mod,pve,label\n";
    for (const auto& s : samples) {
        out += format_iso(s.date);
        out += ',' + render_number(s.features.t_avg);
        out += ',' + render_number(s.features.kt);
        out += ',' + render_number(s.features.s_mod);
        out += ',' + render_number(s.pve);
        out += ',' + std::to_string(s.label);
        out += '\n';
    }
    return out;
}

}  // namespace pvcast::data
