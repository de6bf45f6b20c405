#pragma once

#include <cstdint>
#include <stdexcept>

#include <nvmx/photon/mixture.hpp>

namespace nvmx {

struct FidelityResult {
    double fidelity = 0.0;   // balanced accuracy at the optimal cut
    std::uint64_t threshold = 0;  // classify NV0 when count <= threshold
    double p_correct_dark = 0.0;
    double p_correct_bright = 0.0;
};

// Charge assignment quality for a photon-count threshold classifier.
// Balanced accuracy (1/2)[P(k <= t | lambda0) + P(k > t | lambda1)] scanned
// over every integer cut in the truncated support; ties resolve to the lowest
// cut. The mixture weight cancels out of this figure by construction.
inline FidelityResult charge_fidelity(const PoissonMixture& m) {
    m.validate();
    if (!(m.lambda1 > m.lambda0))
        throw std::invalid_argument(
            "charge_fidelity: components coincide, no threshold separates them");
    std::uint64_t kmax = m.support_max();
    FidelityResult best;
    double cdf0 = 0.0, cdf1 = 0.0;
    for (std::uint64_t t = 0; t <= kmax; ++t) {
        cdf0 += poisson_pmf(t, m.lambda0);
        cdf1 += poisson_pmf(t, m.lambda1);
        double f = 0.5 * (cdf0 + 1.0 - cdf1);
        if (f > best.fidelity) {
            best.fidelity = f;
            best.threshold = t;
            best.p_correct_dark = cdf0;
            best.p_correct_bright = 1.0 - cdf1;
        }
    }
    return best;
}

} // namespace nvmx
