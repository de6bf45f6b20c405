#pragma once

#include <cmath>
#include <stdexcept>

namespace nvmx {

// Common-mode detection noise behind the spurious baseline correlation: every
// site's Poissonian signal (mean counts mu) is multiplied by one shared
// Gaussian gain factor N ~ Normal(1, sigma_n) per shot. Laser power drift and
// slow pointing wander both act this way, and because the gain is shared it
// correlates otherwise independent emitters.
struct BackgroundModel {
    double mu = 4.0;
    double sigma_n = 0.05;

    void validate() const {
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw std::invalid_argument("BackgroundModel: mean counts must be >= 0");
        if (!(sigma_n >= 0.0) || !std::isfinite(sigma_n))
            throw std::invalid_argument("BackgroundModel: gain spread must be >= 0");
    }

    // The small-fluctuation expansions below drop terms of order mu*sigma_n^2
    // and sigma_n^2 against 1; outside this regime only the exact forms hold.
    bool in_validity_regime() const {
        double s2 = sigma_n * sigma_n;
        return mu * s2 < 0.1 && s2 < 0.1;
    }
};

struct BackgroundCorrelation {
    double exact = 0.0;
    double approx = 0.0;
};

// Correlation induced between two independent equal-brightness sites by the
// shared gain. With S_i = N X_i, X_i ~ Poisson(mu), N ~ Normal(1, sigma_n):
//
//   Corr(S_1, S_2) = mu^2 s^2 / (mu^2 s^2 + mu s^2 + mu),   s = sigma_n
//
// which collapses to mu s^2 when both mu s^2 and s^2 are small. The shot
// noise floor (the lone mu in the denominator) is what keeps dim emitters
// nearly immune to gain fluctuations.
inline BackgroundCorrelation background_correlation(const BackgroundModel& bg) {
    bg.validate();
    double s2 = bg.sigma_n * bg.sigma_n;
    BackgroundCorrelation out;
    out.approx = bg.mu * s2;
    double denom = bg.mu * bg.mu * s2 + bg.mu * s2 + bg.mu;
    out.exact = denom > 0.0 ? bg.mu * bg.mu * s2 / denom : 0.0;
    return out;
}

// Same setup but with the underlying signals already correlated at r_true.
// The gain noise adds to rather than rescales the intrinsic correlation.
inline BackgroundCorrelation background_correlation_with_signal(const BackgroundModel& bg,
                                                                double r_true) {
    bg.validate();
    if (!(std::abs(r_true) <= 1.0))
        throw std::invalid_argument("background_correlation_with_signal: |r_true| <= 1");
    double s2 = bg.sigma_n * bg.sigma_n;
    BackgroundCorrelation out;
    out.approx = bg.mu * s2 + r_true * (s2 + 1.0);
    double denom = bg.mu * bg.mu * s2 + bg.mu * s2 + bg.mu;
    out.exact = denom > 0.0
                    ? (bg.mu * bg.mu * s2 + bg.mu * r_true * (s2 + 1.0)) / denom
                    : r_true;
    return out;
}

// How far the measured correlation sits above the true one:
//
//   delta_r = (1 - r_true) mu sigma_n^2 >= 0
//
// in the validity regime. The offset is the same no matter the sign of the
// intrinsic correlation, which is why a single scalar baseline, measured once
// with no applied signal, can be subtracted from a whole correlator set.
inline double offset_under_true_correlation(const BackgroundModel& bg, double r_true) {
    bg.validate();
    if (!(std::abs(r_true) <= 1.0))
        throw std::invalid_argument("offset_under_true_correlation: |r_true| <= 1");
    return (1.0 - r_true) * bg.mu * bg.sigma_n * bg.sigma_n;
}

} // namespace nvmx
