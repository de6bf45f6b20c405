#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/camera.hpp>
#include <nvmx/core/frames.hpp>
#include <nvmx/core/site.hpp>

namespace nvmx {

namespace extract_detail {

// top-left corner of the n x n box centered on the site, throwing when the
// box would hang over the frame edge
inline void region_origin(const FrameStack& s, const NVSite& site, int n, std::size_t& x0,
                          std::size_t& y0) {
    if (n < 1) throw std::invalid_argument("region_origin: box size must be >= 1");
    auto cx = static_cast<long>(std::llround(site.x));
    auto cy = static_cast<long>(std::llround(site.y));
    long left = cx - n / 2;
    long top = cy - n / 2;
    if (left < 0 || top < 0 || left + n > static_cast<long>(s.width) ||
        top + n > static_cast<long>(s.height))
        throw std::invalid_argument("extract: site region clipped by the frame edge");
    x0 = static_cast<std::size_t>(left);
    y0 = static_cast<std::size_t>(top);
}

} // namespace extract_detail

// Photon-counting readout: number of pixels in the n x n box around the site
// whose raw value exceeds the ADU threshold. Bounded by n^2, so one count
// per pixel no matter how bright.
inline int threshold_count(const FrameStack& s, std::uint32_t frame_idx, const NVSite& site,
                           const CameraModel& camera) {
    if (frame_idx >= s.n_frames) throw std::invalid_argument("threshold_count: bad frame index");
    std::size_t x0, y0;
    extract_detail::region_origin(s, site, camera.roi_n, x0, y0);
    int count = 0;
    for (int dy = 0; dy < camera.roi_n; ++dy)
        for (int dx = 0; dx < camera.roi_n; ++dx)
            if (s.at(frame_idx, static_cast<std::uint32_t>(y0 + dy),
                     static_cast<std::uint32_t>(x0 + dx)) > camera.adu_threshold)
                ++count;
    return count;
}

// Raw ADU sum over the n x n box around the site.
inline double region_sum(const FrameStack& s, std::uint32_t frame_idx, const NVSite& site,
                         int n) {
    if (frame_idx >= s.n_frames) throw std::invalid_argument("region_sum: bad frame index");
    std::size_t x0, y0;
    extract_detail::region_origin(s, site, n, x0, y0);
    double sum = 0.0;
    for (int dy = 0; dy < n; ++dy)
        for (int dx = 0; dx < n; ++dx)
            sum += s.at(frame_idx, static_cast<std::uint32_t>(y0 + dy),
                        static_cast<std::uint32_t>(x0 + dx));
    return sum;
}

// Drift-cancelling normalization of a signal reading against its reference.
inline double normalize_signal(double c_sig, double c_ref) {
    if (!(c_ref > 0.0)) throw std::invalid_argument("normalize_signal: reference must be > 0");
    return c_sig / c_ref;
}

// One extraction record: either the raw pair (c_sig, c_ref, c_norm) for
// signal/reference experiments or the thresholded count for charge readout.
struct ExtractionRow {
    std::uint32_t frame = 0;
    int site_id = 0;
    double c_sig = 0.0;
    double c_ref = 0.0;
    double c_norm = 0.0;
    int s_count = 0;
};

// Thresholded counts for one site across every frame of the stack.
inline std::vector<int> threshold_counts(const FrameStack& s, const NVSite& site,
                                         const CameraModel& camera) {
    std::vector<int> out(s.n_frames);
    for (std::uint32_t f = 0; f < s.n_frames; ++f) out[f] = threshold_count(s, f, site, camera);
    return out;
}

// Signal/reference extraction for stacks with alternating frames
// (even = signal, odd = reference).
inline std::vector<ExtractionRow> extract_paired(const FrameStack& s, const NVSite& site,
                                                 int box_n) {
    if (s.n_frames % 2 != 0)
        throw std::invalid_argument("extract_paired: stack must hold signal/reference pairs");
    std::vector<ExtractionRow> rows;
    rows.reserve(s.n_frames / 2);
    for (std::uint32_t f = 0; f + 1 < s.n_frames; f += 2) {
        ExtractionRow r;
        r.frame = f / 2;
        r.site_id = site.id;
        r.c_sig = region_sum(s, f, site, box_n);
        r.c_ref = region_sum(s, f + 1, site, box_n);
        r.c_norm = normalize_signal(r.c_sig, r.c_ref);
        rows.push_back(r);
    }
    return rows;
}

} // namespace nvmx
