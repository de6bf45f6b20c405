#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/rng.hpp>

namespace nvmx {

struct CountStats {
    double mean = 0.0;
    double var = 0.0;
};

inline CountStats count_stats(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("count_stats: need at least 2 samples");
    double s = 0.0;
    for (double x : xs) s += x;
    double mean = s / static_cast<double>(xs.size());
    double q = 0.0;
    for (double x : xs) q += (x - mean) * (x - mean);
    return {mean, q / static_cast<double>(xs.size() - 1)};
}

// Readout noise relative to an ideal projective measurement:
//
//   sigma_R = sqrt(1 + 2 (var0 + var1) / (mean0 - mean1)^2)
//
// sigma_R = 1 means the two preparations are distinguished perfectly in one
// shot; photon shot noise and incomplete contrast push it above 1.
inline double readout_noise(const CountStats& s0, const CountStats& s1) {
    if (s0.var < 0.0 || s1.var < 0.0)
        throw std::invalid_argument("readout_noise: variances must be >= 0");
    double d = s0.mean - s1.mean;
    if (d == 0.0)
        throw std::invalid_argument("readout_noise: equal means, noise is unbounded");
    return std::sqrt(1.0 + 2.0 * (s0.var + s1.var) / (d * d));
}

struct SigmaREstimate {
    double sigma_r = 0.0;
    double ci_lo = 0.0;   // 2.5th bootstrap percentile
    double ci_hi = 0.0;   // 97.5th
    int n_boot = 0;
};

// Plug-in estimate from two groups of per-shot counts with a percentile
// bootstrap over shots (resampling within each group independently).
inline SigmaREstimate sigma_r_from_samples(const std::vector<double>& g0,
                                           const std::vector<double>& g1, int n_boot = 200,
                                           std::uint64_t seed = 1) {
    SigmaREstimate est;
    est.sigma_r = readout_noise(count_stats(g0), count_stats(g1));
    est.n_boot = n_boot;
    if (n_boot <= 0) return est;

    RngStream rng = RngStream::root(seed).child(0x626f6f74);
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(n_boot));
    std::vector<double> r0(g0.size()), r1(g1.size());
    for (int b = 0; b < n_boot; ++b) {
        for (auto& x : r0) x = g0[rng.next_u64() % g0.size()];
        for (auto& x : r1) x = g1[rng.next_u64() % g1.size()];
        try {
            reps.push_back(readout_noise(count_stats(r0), count_stats(r1)));
        } catch (const std::invalid_argument&) {
            // resample with equal means carries no information; skip it
        }
    }
    if (reps.empty()) {
        est.ci_lo = est.ci_hi = est.sigma_r;
        return est;
    }
    std::sort(reps.begin(), reps.end());
    auto pick = [&reps](double q) {
        double pos = q * static_cast<double>(reps.size() - 1);
        std::size_t i = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(i);
        if (i + 1 >= reps.size()) return reps.back();
        return reps[i] * (1.0 - frac) + reps[i + 1] * frac;
    };
    est.ci_lo = pick(0.025);
    est.ci_hi = pick(0.975);
    return est;
}

} // namespace nvmx
