#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/constants.hpp>
#include <nvmx/cov/experiment.hpp>
#include <nvmx/spin/xy8.hpp>

namespace nvmx {

// Covariance noise spectroscopy: every site runs the same XY8 sequence while
// a shared AC field of unknown (uniformly random per shot) phase drives the
// sample, and the sweep variable is the AC frequency. Only near the filter
// resonance 1/(2 tau) does the sequence rectify the field into a per-shot
// phase large enough to correlate the readouts.
struct SpectroscopyConfig {
    XY8Config xy8;
    CoherenceModel coherence;            // shared decoherence model
    std::vector<double> freqs_hz;        // sweep grid
    double b_amp_t = 0.0;                // AC field amplitude
    std::vector<std::uint8_t> opposite;  // per-site initial-state flags
    SccReadout readout;
    std::size_t n_shots = 1000000;       // per frequency point
    std::size_t baseline_shots = 0;      // 0 means reuse n_shots
    double gain_sigma = 0.0;
    bool per_pair_baseline = false;
    std::uint64_t seed = 1;
    PhysConstants constants{};

    void validate() const {
        xy8.validate();
        coherence.validate();
        readout.validate();
        if (opposite.size() < 2)
            throw std::invalid_argument("SpectroscopyConfig: need at least 2 sites");
        if (freqs_hz.empty())
            throw std::invalid_argument("SpectroscopyConfig: empty frequency grid");
        for (double f : freqs_hz)
            if (!(f > 0.0))
                throw std::invalid_argument("SpectroscopyConfig: frequencies must be > 0");
        if (n_shots < 1000)
            throw std::invalid_argument(
                "SpectroscopyConfig: need at least 1000 shots per point");
        if (!(gain_sigma >= 0.0))
            throw std::invalid_argument("SpectroscopyConfig: gain spread must be >= 0");
        if (!(b_amp_t >= 0.0))
            throw std::invalid_argument("SpectroscopyConfig: field amplitude must be >= 0");
        // keep the phase-to-population mapping single-valued: past pi/2 the
        // sine response folds over and the correlator is no longer monotone
        // in the field
        if (!(xy8_peak_phase(xy8, b_amp_t, constants) < 0.5 * kPi))
            throw std::invalid_argument(
                "SpectroscopyConfig: field too strong, resonant phase must stay under pi/2");
    }
};

// Field amplitude that accumulates the requested resonant phase.
inline double b_for_peak_phase(const XY8Config& cfg, double phase_rad,
                               const PhysConstants& pc = {}) {
    if (!(phase_rad > 0.0))
        throw std::invalid_argument("b_for_peak_phase: phase must be > 0");
    return phase_rad / xy8_peak_phase(cfg, 1.0, pc);
}

// <sin(phi_C) sin(phi_C)> for two sites riding the same field, averaged over
// the uniform field phase. The filter maps a field of phase u onto the
// accumulated phase A cos(u + delta) with A set by the quadrature weights;
// the average is evaluated by trapezoid over one period, which for a smooth
// periodic integrand converges to machine precision long before the default
// resolution.
inline double spectroscopy_phase_product(const XY8Config& cfg, double b_field_t,
                                         double freq_hz, const PhysConstants& pc = {},
                                         int n_quad = 256) {
    if (n_quad < 8) throw std::invalid_argument("spectroscopy_phase_product: grid too coarse");
    FilterWeights w = xy8_filter_weights(cfg, freq_hz);
    double gb = pc.gyromagnetic_rad() * b_field_t;
    double sum = 0.0;
    for (int i = 0; i < n_quad; ++i) {
        double u = kTwoPi * static_cast<double>(i) / static_cast<double>(n_quad);
        double phi = gb * (std::cos(u) * w.w_cos - std::sin(u) * w.w_sin);
        double s = std::sin(phi);
        sum += s * s;
    }
    return sum / static_cast<double>(n_quad);
}

inline SweepResult simulate_spectroscopy(const SpectroscopyConfig& cfg) {
    cfg.validate();
    std::size_t k = cfg.opposite.size();
    RngStream base = RngStream::root(cfg.seed);

    std::size_t cal_shots = cfg.baseline_shots ? cfg.baseline_shots : cfg.n_shots;
    BaselineCalibration cal =
        calibrate_baseline(k, cfg.readout, cal_shots, cfg.gain_sigma, base);

    SweepResult out;
    out.baseline = cal.scalar;
    out.baseline_pairs = cal.pairs;
    out.records.reserve(cfg.freqs_hz.size() * k * (k - 1) / 2);

    double t_total = cfg.xy8.total_time_s();
    double coh = coherence_factor(cfg.coherence, t_total);
    double gb = cfg.constants.gyromagnetic_rad() * cfg.b_amp_t;

    std::vector<double> y(k);
    for (std::size_t f = 0; f < cfg.freqs_hz.size(); ++f) {
        FilterWeights w = xy8_filter_weights(cfg.xy8, cfg.freqs_hz[f]);
        CovAccumulator acc(k);
        for (std::size_t s = 0; s < cfg.n_shots; ++s) {
            RngStream rng = base.child(kCovShotTag, f, s);
            double gain = draw_gain(rng, cfg.gain_sigma);
            // the AC source free-runs relative to the pulse sequence, so the
            // field phase is uniform per shot but identical for all sites
            double u = kTwoPi * rng.uniform();
            double phi_c = gb * (std::cos(u) * w.w_cos - std::sin(u) * w.w_sin);
            double signal = coh * std::sin(phi_c);
            for (std::size_t j = 0; j < k; ++j) {
                double p1 = 0.5 * (1.0 - (cfg.opposite[j] ? -signal : signal));
                int spin = rng.bernoulli(p1) ? 1 : 0;
                y[j] = cfg.readout.sample(spin, rng, gain);
            }
            acc.add(y);
        }
        std::vector<CorrelationRecord> pairs = acc.all_pairs();
        if (cfg.per_pair_baseline)
            subtract_baseline(pairs, cal.pairs);
        else
            subtract_baseline(pairs, cal.scalar);
        for (const auto& rec : pairs) out.records.push_back({cfg.freqs_hz[f], rec});
    }
    return out;
}

// Closed-form prediction for one pair of the spectroscopy sweep, combining
// the phase product of the shared field with both sites' coherence loss and
// readout noise.
inline double expected_spectroscopy_correlation(const SpectroscopyConfig& cfg, double freq_hz,
                                                std::size_t site_i, std::size_t site_j) {
    cfg.validate();
    if (site_i >= cfg.opposite.size() || site_j >= cfg.opposite.size() || site_i == site_j)
        throw std::invalid_argument("expected_spectroscopy_correlation: bad site indices");
    double coh = coherence_factor(cfg.coherence, cfg.xy8.total_time_s());
    double pp = spectroscopy_phase_product(cfg.xy8, cfg.b_amp_t, freq_hz, cfg.constants);
    double sign = (cfg.opposite[site_i] != cfg.opposite[site_j]) ? -1.0 : 1.0;
    double sr = cfg.readout.sigma_r();
    return expected_pair_correlation(coh, coh, sr, sr, sign * pp);
}

} // namespace nvmx
