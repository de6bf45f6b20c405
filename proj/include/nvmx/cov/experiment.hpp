#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/rng.hpp>
#include <nvmx/cov/accumulator.hpp>
#include <nvmx/cov/records.hpp>
#include <nvmx/cov/scc_readout.hpp>

namespace nvmx {

// Stream tags for the correlation experiments; each shot owns a child stream
// so shot generation can be distributed without coordinating RNG state.
inline constexpr std::uint64_t kCovShotTag = 0x73686f74; // "shot"
inline constexpr std::uint64_t kCovCalTag = 0x63616c;    // "cal"

// One correlator attached to its sweep coordinate (rotation angle, AC
// frequency, and so on). Matches the exported CSV row layout.
struct SweepRecord {
    double sweep_value = 0.0;
    CorrelationRecord rec;
};

struct BaselineCalibration {
    BaselineEstimate scalar;
    std::vector<CorrelationRecord> pairs;
};

// Full output of one simulated sweep: every pair correlator at every sweep
// point (already baseline-corrected), plus the calibration that was used.
struct SweepResult {
    std::vector<SweepRecord> records;
    BaselineEstimate baseline;
    std::vector<CorrelationRecord> baseline_pairs;
};

// Common multiplicative gain for one shot. Clamped at zero; a gain spread
// wide enough to clip is far outside any regime the model is meant for.
inline double draw_gain(RngStream& rng, double gain_sigma) {
    if (gain_sigma == 0.0) return 1.0;
    return std::max(0.0, 1.0 + gain_sigma * rng.normal());
}

// No-signal calibration run: every site sits in spin 0 (fresh initialization,
// no microwaves), so the only shared fluctuation is the readout gain and the
// pair correlators measure the spurious baseline alone. The scalar estimate
// averages all pairs; its error assumes the pair estimates are independent,
// which holds to the (tiny) level of the correlations themselves.
inline BaselineCalibration calibrate_baseline(std::size_t n_sites, const SccReadout& readout,
                                              std::size_t n_shots, double gain_sigma,
                                              RngStream base) {
    if (n_sites < 2)
        throw std::invalid_argument("calibrate_baseline: need at least 2 sites");
    if (n_shots < 2) throw std::invalid_argument("calibrate_baseline: need at least 2 shots");
    readout.validate();

    CovAccumulator acc(n_sites);
    std::vector<double> y(n_sites);
    for (std::size_t s = 0; s < n_shots; ++s) {
        RngStream rng = base.child(kCovCalTag, s);
        double gain = draw_gain(rng, gain_sigma);
        for (std::size_t j = 0; j < n_sites; ++j) y[j] = readout.sample(0, rng, gain);
        acc.add(y);
    }

    BaselineCalibration cal;
    cal.pairs = acc.all_pairs();
    double mean = 0.0, se = 0.0;
    for (const auto& rec : cal.pairs) {
        mean += rec.r_raw;
        se += rec.stderr;
    }
    double np = static_cast<double>(cal.pairs.size());
    cal.scalar.baseline = mean / np;
    cal.scalar.stderr = se / np / std::sqrt(np);
    cal.scalar.n_pairs = cal.pairs.size();
    cal.scalar.n_shots = n_shots;
    return cal;
}

} // namespace nvmx
