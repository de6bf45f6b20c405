#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/rng.hpp>

namespace nvmx {

// Stable for any k, lambda; the lambda = 0 component is a point mass at 0.
inline double poisson_pmf(std::uint64_t k, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_pmf: lambda must be >= 0");
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    double kd = static_cast<double>(k);
    return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

// Photon-number model of a charge-state readout: a dark component at lambda0
// (ionized) and a bright one at lambda1 (negative), with w_minus the bright
// weight.
struct PoissonMixture {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double w_minus = 0.0;

    void validate() const {
        if (!(lambda0 >= 0.0)) throw std::invalid_argument("PoissonMixture: lambda0 must be >= 0");
        if (!(lambda1 >= lambda0))
            throw std::invalid_argument("PoissonMixture: lambda1 must be >= lambda0");
        if (w_minus < 0.0 || w_minus > 1.0)
            throw std::invalid_argument("PoissonMixture: w_minus must be in [0, 1]");
    }

    double pmf(std::uint64_t k) const {
        return (1.0 - w_minus) * poisson_pmf(k, lambda0) + w_minus * poisson_pmf(k, lambda1);
    }

    double mean() const { return (1.0 - w_minus) * lambda0 + w_minus * lambda1; }

    double variance() const {
        double d = lambda1 - lambda0;
        return mean() + w_minus * (1.0 - w_minus) * d * d;
    }

    std::uint64_t sample(RngStream& rng) const {
        double lam = rng.bernoulli(w_minus) ? lambda1 : lambda0;
        return rng.poisson(lam);
    }

    // Smallest K whose upper tail (of the wider component) is below 1e-12;
    // sums over [0, K] then cover the distribution to that accuracy.
    std::uint64_t support_max() const {
        double lam = std::max(lambda0, lambda1);
        double cum = 0.0;
        for (std::uint64_t k = 0; k < 4000; ++k) {
            cum += poisson_pmf(k, lam);
            if (1.0 - cum < 1e-12 && static_cast<double>(k) > lam) return k;
        }
        return 4000;
    }
};

// Count histogram indexed by photon number; real-valued weights so both raw
// tallies and normalized frequencies work.
using CountHistogram = std::vector<double>;

inline CountHistogram histogram_from_samples(const std::vector<std::uint64_t>& samples) {
    CountHistogram h;
    for (std::uint64_t s : samples) {
        if (s >= h.size()) h.resize(s + 1, 0.0);
        h[s] += 1.0;
    }
    return h;
}

} // namespace nvmx
