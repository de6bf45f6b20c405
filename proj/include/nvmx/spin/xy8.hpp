#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <nvmx/core/constants.hpp>

namespace nvmx {

// Pulse train geometry for an XY8 sequence: n_pulses pi pulses at
// tau/2, 3 tau/2, ..., with total free evolution n_pulses * tau. The XY
// phase pattern matters for pulse-error robustness, not for anything
// computed here, so only the timing is kept.
struct XY8Config {
    double tau_s = 250e-9;
    int n_pulses = 16;

    double total_time_s() const { return static_cast<double>(n_pulses) * tau_s; }
    double resonance_hz() const { return 1.0 / (2.0 * tau_s); }

    void validate() const {
        if (!(tau_s > 0.0)) throw std::invalid_argument("XY8Config: tau must be > 0");
        if (n_pulses < 8 || n_pulses % 8 != 0)
            throw std::invalid_argument("XY8Config: n_pulses must be a positive multiple of 8");
    }
};

// Quadrature weights of the sequence filter: the integrals of the toggling
// function against cos(2 pi f t) and sin(2 pi f t). The toggling function
// starts at +1 and flips sign at every pulse.
struct FilterWeights {
    double w_cos = 0.0;
    double w_sin = 0.0;
};

inline FilterWeights xy8_filter_weights(const XY8Config& cfg, double freq_hz) {
    cfg.validate();
    if (freq_hz < 0.0) throw std::invalid_argument("xy8_filter_weights: frequency must be >= 0");

    // segment boundaries: 0, tau/2, 3 tau/2, ..., T
    FilterWeights w;
    double omega = kTwoPi * freq_hz;
    double sign = 1.0;
    double t0 = 0.0;
    for (int k = 0; k <= cfg.n_pulses; ++k) {
        double t1 = (k == cfg.n_pulses) ? cfg.total_time_s()
                                        : (0.5 + static_cast<double>(k)) * cfg.tau_s;
        if (omega < 1e-9) {
            // static limit: plain signed lengths
            w.w_cos += sign * (t1 - t0);
        } else {
            w.w_cos += sign * (std::sin(omega * t1) - std::sin(omega * t0)) / omega;
            w.w_sin += sign * (std::cos(omega * t0) - std::cos(omega * t1)) / omega;
        }
        sign = -sign;
        t0 = t1;
    }
    return w;
}

// Phase a spin picks up from an AC field B cos(2 pi f t + phase) filtered
// through the pulse train. Linear in the field amplitude by construction.
inline double xy8_phase(const XY8Config& cfg, double b_field_t, double freq_hz,
                        double phase_rad, const PhysConstants& pc = {}) {
    FilterWeights w = xy8_filter_weights(cfg, freq_hz);
    return pc.gyromagnetic_rad() * b_field_t *
           (std::cos(phase_rad) * w.w_cos - std::sin(phase_rad) * w.w_sin);
}

// Largest phase the sequence can accumulate: at f = 1/(2 tau) the toggling
// function and the field line up as a square wave against its fundamental,
// whose overlap over the full record is 2 T / pi.
inline double xy8_peak_phase(const XY8Config& cfg, double b_field_t,
                             const PhysConstants& pc = {}) {
    cfg.validate();
    return pc.gyromagnetic_rad() * b_field_t * 2.0 * cfg.total_time_s() / 3.14159265358979323846;
}

// Stretched-exponential coherence envelope exp(-(t/T2)^p). The default
// exponent suits shallow implanted centers dominated by a slowly
// fluctuating surface bath.
struct CoherenceModel {
    double t2_s = 15e-6;
    double exponent = 2.0;

    void validate() const {
        if (!(t2_s > 0.0)) throw std::invalid_argument("CoherenceModel: T2 must be > 0");
        if (!(exponent > 0.0 && exponent <= 4.0))
            throw std::invalid_argument("CoherenceModel: exponent must be in (0, 4]");
    }
};

inline double coherence_factor(const CoherenceModel& m, double t_s) {
    m.validate();
    if (t_s < 0.0) throw std::invalid_argument("coherence_factor: time must be >= 0");
    if (t_s == 0.0) return 1.0;
    return std::exp(-std::pow(t_s / m.t2_s, m.exponent));
}

// What a correlation measurement between two centers retains of the signal:
// each partner contributes its own envelope at the full sequence length.
inline double pair_coherence_factor(const CoherenceModel& a, const CoherenceModel& b,
                                    double t_s) {
    return coherence_factor(a, t_s) * coherence_factor(b, t_s);
}

} // namespace nvmx
