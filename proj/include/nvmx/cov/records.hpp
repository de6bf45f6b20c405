#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nvmx {

// One measured pair correlator. r_corr is always r_raw minus the baseline
// stored alongside it, and stderr refers to the corrected value: once a
// baseline with nonzero uncertainty has been subtracted, the raw standard
// error and the baseline error combine in quadrature.
struct CorrelationRecord {
    int site_i = 0;
    int site_j = 0;
    double r_raw = 0.0;
    double stderr = 0.0;
    double baseline = 0.0;
    double baseline_stderr = 0.0;
    double r_corr = 0.0;
    std::size_t n_shots = 0;
};

// Scalar background-correlation calibration, the mean over all pair
// correlators of an independent no-signal run.
struct BaselineEstimate {
    double baseline = 0.0;
    double stderr = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_shots = 0;
};

// Subtracting a global baseline is a pure shift of every correlator; the
// baseline uncertainty enters each record's error in quadrature. Applying a
// second baseline shifts again relative to the already-corrected values.
inline void subtract_baseline(std::vector<CorrelationRecord>& records,
                              const BaselineEstimate& cal) {
    if (!std::isfinite(cal.baseline) || !std::isfinite(cal.stderr))
        throw std::invalid_argument("subtract_baseline: baseline must be finite");
    for (auto& rec : records) {
        rec.baseline += cal.baseline;
        rec.baseline_stderr = std::sqrt(rec.baseline_stderr * rec.baseline_stderr +
                                        cal.stderr * cal.stderr);
        rec.r_corr = rec.r_raw - rec.baseline;
        rec.stderr = std::sqrt(rec.stderr * rec.stderr + cal.stderr * cal.stderr);
    }
}

// Per-pair variant: each record is corrected by the calibration record with
// the same (site_i, site_j). Useful when sites differ enough in brightness
// that a common-mode gain couples to them unevenly.
inline void subtract_baseline(std::vector<CorrelationRecord>& records,
                              const std::vector<CorrelationRecord>& calibration) {
    for (auto& rec : records) {
        const CorrelationRecord* match = nullptr;
        for (const auto& cal : calibration) {
            if (cal.site_i == rec.site_i && cal.site_j == rec.site_j) {
                match = &cal;
                break;
            }
        }
        if (!match)
            throw std::invalid_argument("subtract_baseline: no calibration record for pair");
        rec.baseline += match->r_raw;
        rec.baseline_stderr = std::sqrt(rec.baseline_stderr * rec.baseline_stderr +
                                        match->stderr * match->stderr);
        rec.r_corr = rec.r_raw - rec.baseline;
        rec.stderr = std::sqrt(rec.stderr * rec.stderr + match->stderr * match->stderr);
    }
}

// Expected correlator for a sensing pair:
//
//   r_ij = F_i F_j <sin(phi_i) sin(phi_j)> / (sigma_Ri sigma_Rj)
//
// where F = exp(-chi) is the coherence factor surviving the sensing window,
// phi the field-induced phase, and sigma_R the per-shot readout noise of each
// site. The phase product carries the sign: sites prepared in opposite spin
// states accumulate opposite phase and correlate negatively. Since |F| <= 1
// and the phase product is bounded by 1, the magnitude can never exceed
// 1/(sigma_Ri sigma_Rj), the value reached by lossless synchronized flips.
inline double expected_pair_correlation(double coherence_i, double coherence_j,
                                        double sigma_ri, double sigma_rj,
                                        double phase_product) {
    if (!(coherence_i > 0.0 && coherence_i <= 1.0) ||
        !(coherence_j > 0.0 && coherence_j <= 1.0))
        throw std::invalid_argument(
            "expected_pair_correlation: coherence factors must lie in (0, 1]");
    if (!(sigma_ri >= 1.0) || !(sigma_rj >= 1.0))
        throw std::invalid_argument(
            "expected_pair_correlation: readout noise is bounded below by 1");
    if (!(std::abs(phase_product) <= 1.0))
        throw std::invalid_argument(
            "expected_pair_correlation: |<sin sin>| cannot exceed 1");
    return coherence_i * coherence_j * phase_product / (sigma_ri * sigma_rj);
}

inline double pair_correlation_bound(double sigma_ri, double sigma_rj) {
    if (!(sigma_ri >= 1.0) || !(sigma_rj >= 1.0))
        throw std::invalid_argument(
            "pair_correlation_bound: readout noise is bounded below by 1");
    return 1.0 / (sigma_ri * sigma_rj);
}

// Inverts the peak-to-peak height of a measured correlation oscillation into
// the geometric-mean readout noise of the pair. For two sites with equal
// sigma_R the full-contrast amplitude is 1/sigma_R^2, so sigma_R =
// 1/sqrt(amplitude). Amplitudes above 1 would imply sub-projective noise.
inline double sigma_r_from_amplitude(double amplitude) {
    if (!(amplitude > 0.0 && amplitude <= 1.0))
        throw std::invalid_argument("sigma_r_from_amplitude: amplitude must be in (0, 1]");
    return 1.0 / std::sqrt(amplitude);
}

} // namespace nvmx
