#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nvmx {

// Populations of the three levels that matter during an ionization pulse:
// NV- with m_s = 0, NV- with m_s = +-1, and NV0.
struct LevelPopulations {
    double minus_ms0 = 0.0;
    double minus_ms1 = 0.0;
    double neutral = 0.0;

    double nv_minus() const { return minus_ms0 + minus_ms1; }
    double sum() const { return minus_ms0 + minus_ms1 + neutral; }

    void validate() const {
        if (minus_ms0 < -1e-12 || minus_ms1 < -1e-12 || neutral < -1e-12)
            throw std::invalid_argument("LevelPopulations: negative population");
        if (std::abs(sum() - 1.0) > 1e-9)
            throw std::invalid_argument("LevelPopulations: populations must sum to 1");
    }
};

// Laser-driven transition rates at a reference per-site power. Ionization and
// recombination are two-photon processes (rate ~ intensity^2 by default,
// exponent configurable); spin mixing rides on ordinary optical cycling and
// scales linearly. Because the exponents differ, changing the power changes
// the shape of the dynamics, not just its clock, which is what makes the
// per-site power an optimization axis at all.
struct RateCoefficients {
    double ion_ms0_hz = 1.0e6;
    double ion_ms1_hz = 6.0e6;
    double recomb_hz = 2.0e6;
    double mixing_hz = 2.0e6;
    double ion_exponent = 2.0;
    double recomb_exponent = 2.0;
    double mixing_exponent = 1.0;
};

struct RateModel {
    RateCoefficients coeff;
    double reference_power_mw = 6.0;
    // Recombined charge returns with its spin scrambled over the three
    // projections, so 1/3 lands back in m_s = 0.
    double recomb_branch_ms0 = 1.0 / 3.0;

    struct Rates {
        double ion0 = 0.0, ion1 = 0.0, recomb = 0.0, mixing = 0.0;
    };

    Rates at_power(double power_mw) const {
        if (power_mw < 0.0) throw std::invalid_argument("RateModel: power must be >= 0");
        double u = power_mw / reference_power_mw;
        Rates r;
        r.ion0 = coeff.ion_ms0_hz * std::pow(u, coeff.ion_exponent);
        r.ion1 = coeff.ion_ms1_hz * std::pow(u, coeff.ion_exponent);
        r.recomb = coeff.recomb_hz * std::pow(u, coeff.recomb_exponent);
        r.mixing = coeff.mixing_hz * std::pow(u, coeff.mixing_exponent);
        return r;
    }

    // Generator of the master equation, column-stochastic (columns sum to 0).
    // State order: [minus_ms0, minus_ms1, neutral].
    Eigen::Matrix3d generator(double power_mw) const {
        Rates r = at_power(power_mw);
        double f0 = recomb_branch_ms0;
        // mixing drives the manifold populations toward (1/3, 2/3)
        double m01 = r.mixing * 2.0 / 3.0;  // ms0 -> ms1
        double m10 = r.mixing * 1.0 / 3.0;  // ms1 -> ms0
        Eigen::Matrix3d g;
        g << -(r.ion0 + m01), m10, f0 * r.recomb,
             m01, -(r.ion1 + m10), (1.0 - f0) * r.recomb,
             r.ion0, r.ion1, -r.recomb;
        return g;
    }

    void validate() const {
        if (coeff.ion_ms0_hz < 0.0 || coeff.ion_ms1_hz < 0.0 || coeff.recomb_hz < 0.0 ||
            coeff.mixing_hz < 0.0)
            throw std::invalid_argument("RateModel: rates must be >= 0");
        if (!(coeff.ion_ms1_hz > coeff.ion_ms0_hz))
            throw std::invalid_argument("RateModel: ion_ms1_hz must exceed ion_ms0_hz");
        if (!(reference_power_mw > 0.0))
            throw std::invalid_argument("RateModel: reference_power_mw must be > 0");
        if (recomb_branch_ms0 < 0.0 || recomb_branch_ms0 > 1.0)
            throw std::invalid_argument("RateModel: recomb_branch_ms0 must be in [0, 1]");
    }

    // 594 nm: strong NV0 absorption, so fast recombination during the pulse.
    // Coefficients calibrated (demos/calibrate_scc.cpp) so a single site at
    // the 6 mW reference has its readout-noise optimum near t = 250 ns with
    // sigma_R about 12.
    static RateModel orange_594() {
        RateModel m;
        m.coeff.ion_ms0_hz = 0.96e6;
        m.coeff.ion_ms1_hz = 2.88e6;
        m.coeff.recomb_hz = 3.84e6;
        m.coeff.mixing_hz = 0.96e6;
        return m;
    }

    // 637 nm: same ionization pathway, much weaker recombination off the
    // NV0 ground state, so the contrast floor sits lower.
    static RateModel red_637() {
        RateModel m = orange_594();
        m.coeff.recomb_hz = 1.0e6;
        m.coeff.mixing_hz = 0.7e6;
        return m;
    }
};

inline RateModel rate_model_preset(const std::string& name) {
    if (name == "orange_594") return RateModel::orange_594();
    if (name == "red_637") return RateModel::red_637();
    throw std::invalid_argument("rate_model_preset: unknown preset '" + name + "'");
}

} // namespace nvmx
