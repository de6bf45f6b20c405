#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <nvmx/core/rng.hpp>
#include <nvmx/photon/fidelity.hpp>
#include <nvmx/photon/mixture.hpp>
#include <nvmx/photon/readout_noise.hpp>

namespace nvmx {

// Per-shot spin readout as the correlation experiments see it: the spin
// projection picks an ionization survival probability (c0 for spin 0, c1 for
// spin 1), the surviving charge state picks a Poisson photon mean, and a
// count threshold turns the camera counts into one binary flag. Everything
// downstream correlates these flags, so sigma_r() here is the readout noise
// of the thresholded flag, not of the underlying counts.
//
// The defaults sit near the single-site operating point: charge contrast of
// ten percent around half-retained NV-, dark and bright photon means from the
// standard readout window, and the fidelity-optimal count cut.
struct SccReadout {
    double c0 = 0.5;             // NV- survival probability after spin-0 ionization
    double c1 = 0.4;             // same for spin 1, which ionizes preferentially
    double lambda0 = 1.6;        // mean counts from NV0
    double lambda1 = 6.7;        // mean counts from NV-
    std::uint64_t threshold = 3; // count > threshold reads as NV-

    void validate() const {
        if (!(c0 >= 0.0 && c0 <= 1.0) || !(c1 >= 0.0 && c1 <= 1.0))
            throw std::invalid_argument("SccReadout: survival probabilities must be in [0, 1]");
        if (c0 == c1)
            throw std::invalid_argument("SccReadout: equal survival leaves no spin contrast");
        if (!(lambda0 >= 0.0) || !(lambda1 > lambda0))
            throw std::invalid_argument("SccReadout: need photon means with lambda1 > lambda0");
    }

    // Upper tail P(count > threshold) of each charge state's Poisson.
    double tail(double lambda) const {
        double cum = 0.0;
        for (std::uint64_t k = 0; k <= threshold; ++k) cum += poisson_pmf(k, lambda);
        return 1.0 - cum;
    }

    // Probability the binary flag fires for a given spin projection.
    double p_fire(int spin) const {
        double c = spin ? c1 : c0;
        return c * tail(lambda1) + (1.0 - c) * tail(lambda0);
    }

    // Readout noise of the thresholded flag. The flag is Bernoulli for each
    // spin preparation, so the moments are exact.
    double sigma_r() const {
        validate();
        double m0 = p_fire(0);
        double m1 = p_fire(1);
        return readout_noise({m0, m0 * (1.0 - m0)}, {m1, m1 * (1.0 - m1)});
    }

    // One shot: charge survival, photon emission at the (possibly gain-
    // modulated) mean, threshold comparison.
    double sample(int spin, RngStream& rng, double gain = 1.0) const {
        bool nv_minus = rng.bernoulli(spin ? c1 : c0);
        double lam = (nv_minus ? lambda1 : lambda0) * gain;
        return rng.poisson(lam) > threshold ? 1.0 : 0.0;
    }
};

// Builds a readout model with a prescribed sigma_R by adjusting the charge
// contrast c0 - c1 around a fixed midpoint. Wider contrast means lower noise,
// monotonically, so bisection suffices. The reachable floor is set by the
// midpoint (contrast can only grow until one probability saturates); targets
// below it throw.
inline SccReadout scc_readout_with_sigma_r(double sigma_r_target, double c_mean = 0.45,
                                           double lambda0 = 1.6, double lambda1 = 6.7) {
    if (!(sigma_r_target > 1.0))
        throw std::invalid_argument("scc_readout_with_sigma_r: target must exceed 1");
    if (!(c_mean > 0.0 && c_mean < 1.0))
        throw std::invalid_argument("scc_readout_with_sigma_r: midpoint must be in (0, 1)");

    SccReadout model;
    model.lambda0 = lambda0;
    model.lambda1 = lambda1;
    model.threshold = charge_fidelity({lambda0, lambda1, 0.5}).threshold;

    auto with_contrast = [&](double dc) {
        SccReadout m = model;
        m.c0 = c_mean + 0.5 * dc;
        m.c1 = c_mean - 0.5 * dc;
        return m;
    };

    double dc_max = 2.0 * std::min(c_mean, 1.0 - c_mean);
    double floor = with_contrast(dc_max).sigma_r();
    if (sigma_r_target < floor)
        throw std::invalid_argument(
            "scc_readout_with_sigma_r: target below the reachable floor at this midpoint");

    double lo = 0.0, hi = dc_max; // sigma_r decreases from +inf at lo to floor at hi
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (with_contrast(mid).sigma_r() > sigma_r_target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return with_contrast(0.5 * (lo + hi));
}

} // namespace nvmx
