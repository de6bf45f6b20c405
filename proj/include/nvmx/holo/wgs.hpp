#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nvmx/core/rng.hpp>
#include <nvmx/holo/field.hpp>

namespace nvmx {

struct WgsOptions {
    int iterations = 50;
    std::uint64_t seed = 7;
    // With weighting off this is plain Gerchberg-Saxton; kept as an option so
    // the two can be benchmarked against each other on identical inputs.
    bool weighted = true;
};

struct WgsResult {
    PhasePattern mask;
    std::vector<double> achieved;       // far-field amplitude at each target pixel
    double uniformity = 0.0;            // min/max of achieved amplitude relative to desired
    std::vector<double> ratio_history;  // per-iteration max/min of achieved/desired
    bool overlap_warning = false;       // some pair of targets closer than one pixel
};

// Weighted Gerchberg-Saxton phase retrieval for spot arrays. Iterates between
// the SLM plane (amplitude clamped to the uniform illumination) and the focal
// plane (amplitude clamped to weighted targets, phase kept free everywhere
// else is discarded). Weights are nudged each round by the ratio of the mean
// achieved amplitude to each spot's own, which evens out the array.
inline WgsResult run_wgs(const SpotTargets& targets, std::size_t width, std::size_t height,
                         const WgsOptions& opt = {}) {
    targets.validate(width, height);
    if (opt.iterations < 1) throw std::invalid_argument("run_wgs: iterations must be >= 1");

    const std::size_t n = width * height;
    const std::size_t hw = width / 2, hh = height / 2;
    const std::size_t k = targets.spots.size();

    // centered target pixel -> unshifted FFT index
    std::vector<std::size_t> idx(k);
    std::vector<double> desired(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto cx = static_cast<std::size_t>(std::llround(targets.spots[i].kx));
        auto cy = static_cast<std::size_t>(std::llround(targets.spots[i].ky));
        if (cx >= width || cy >= height)
            throw std::invalid_argument("run_wgs: target rounds outside the grid");
        std::size_t ux = (cx + width - hw) % width;
        std::size_t uy = (cy + height - hh) % height;
        idx[i] = uy * width + ux;
        desired[i] = targets.spots[i].amplitude;
    }
    WgsResult res;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            double dx = targets.spots[i].kx - targets.spots[j].kx;
            double dy = targets.spots[i].ky - targets.spots[j].ky;
            if (std::sqrt(dx * dx + dy * dy) < 1.0) res.overlap_warning = true;
            if (idx[i] == idx[j])
                throw std::invalid_argument("run_wgs: two targets round to the same pixel");
        }

    RngStream rng = RngStream::root(opt.seed).child(0x77677320u);  // private to this routine
    std::vector<double> phase(n);
    for (auto& p : phase) p = rng.uniform() * kTwoPi;

    std::vector<double> weight = desired;
    std::vector<std::complex<double>> field(n);
    std::vector<double> achieved(k);

    auto measure = [&](const std::vector<std::complex<double>>& far) {
        double rmin = 0.0, rmax = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            achieved[i] = std::abs(far[idx[i]]);
            double r = achieved[i] / desired[i];
            if (i == 0 || r < rmin) rmin = r;
            if (i == 0 || r > rmax) rmax = r;
        }
        res.ratio_history.push_back(rmax > 0.0 && rmin > 0.0 ? rmax / rmin
                                                             : std::numeric_limits<double>::infinity());
        return rmin > 0.0 ? rmin / rmax : 0.0;
    };

    for (int iter = 0; iter < opt.iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) field[i] = std::polar(1.0, phase[i]);
        fft2d(field, width, height);
        measure(field);

        if (opt.weighted) {
            double mean_ratio = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                mean_ratio += achieved[i] / desired[i];
            mean_ratio /= static_cast<double>(k);
            for (std::size_t i = 0; i < k; ++i) {
                double r = achieved[i] / desired[i];
                weight[i] *= mean_ratio / std::max(r, 1e-12 * mean_ratio);
            }
        }

        std::vector<std::complex<double>> constrained(n, {0.0, 0.0});
        for (std::size_t i = 0; i < k; ++i) {
            double ph = std::arg(field[idx[i]]);
            constrained[idx[i]] = std::polar(weight[i], ph);
        }
        fft2d(constrained, width, height, /*inverse=*/true);
        for (std::size_t i = 0; i < n; ++i) phase[i] = wrap_phase(std::arg(constrained[i]));
    }

    // evaluate the final mask once more so the report matches what ships
    for (std::size_t i = 0; i < n; ++i) field[i] = std::polar(1.0, phase[i]);
    fft2d(field, width, height);
    res.uniformity = measure(field);
    res.achieved = achieved;

    res.mask.width = width;
    res.mask.height = height;
    res.mask.phase = std::move(phase);
    return res;
}

} // namespace nvmx
