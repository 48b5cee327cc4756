#pragma once

#include <array>
#include <cmath>

#include "pvcast/gnb.hpp"

// Brute-force product-form posterior, kept deliberately independent of the
// log-space implementation it cross-checks: unlogged densities multiplied in
// extended precision, argmax with the same lower-index tie rule.
namespace pvtest {

inline long double oracle_density(long double x, long double mean, long double variance) {
    constexpr long double pi = 3.14159265358979323846264338327950288L;
    long double d = x - mean;
    return 1.0L / sqrtl(2.0L * pi * variance) * expl(-d * d / (2.0L * variance));
}

inline std::array<long double, pvcast::gnb::kClassCount> oracle_joint(
    const pvcast::gnb::GnbModel& model, const pvcast::data::FeatureVector& f) {
    std::array<long double, pvcast::gnb::kClassCount> joint{};
    for (int k = 0; k < pvcast::gnb::kClassCount; ++k) {
        auto ku = static_cast<std::size_t>(k);
        long double p = static_cast<long double>(model.priors[ku]);
        for (int j = 0; j < pvcast::gnb::kFeatureCount; ++j) {
            auto ju = static_cast<std::size_t>(j);
            p *= oracle_density(f[ju], model.means[ku][ju], model.variances[ku][ju]);
        }
        joint[ku] = p;
    }
    return joint;
}

inline int oracle_predict(const pvcast::gnb::GnbModel& model,
                          const pvcast::data::FeatureVector& f) {
    auto joint = oracle_joint(model, f);
    int best = 0;
    for (int k = 1; k < pvcast::gnb::kClassCount; ++k)
        if (joint[static_cast<std::size_t>(k)] > joint[static_cast<std::size_t>(best)]) best = k;
    return best;
}

inline std::array<double, pvcast::gnb::kClassCount> oracle_posteriors(
    const pvcast::gnb::GnbModel& model, const pvcast::data::FeatureVector& f) {
    auto joint = oracle_joint(model, f);
    long double sum = 0.0L;
    for (auto v : joint) sum += v;
    std::array<double, pvcast::gnb::kClassCount> out{};
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = static_cast<double>(joint[k] / sum);
    return out;
}

}  // namespace pvtest
