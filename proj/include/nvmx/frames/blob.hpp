#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <nvmx/frames/psf.hpp>

namespace nvmx {

struct Blob {
    double x = 0.0;
    double y = 0.0;
    double response = 0.0;  // band-pass amplitude at the peak
    bool ambiguous = false; // another detection closer than the resolution limit
};

struct BlobOptions {
    double sigma_px = 1.3;          // expected emitter width
    double threshold_sigmas = 4.0;  // adaptive cut above the robust background level
    double ambiguity_factor = 3.0;  // pairs closer than this many sigma get flagged
};

namespace blob_detail {

inline std::vector<double> gaussian_blur(const std::vector<double>& img, std::size_t w,
                                         std::size_t h, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        norm += v;
    }
    for (auto& v : kernel) v /= norm;

    auto mirror = [](long i, long n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
        return static_cast<std::size_t>(std::clamp(i, 0l, n - 1));
    };

    std::vector<double> tmp(img.size()), out(img.size());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       img[y * w + mirror(static_cast<long>(x) + i, static_cast<long>(w))];
            tmp[y * w + x] = acc;
        }
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       tmp[mirror(static_cast<long>(y) + i, static_cast<long>(h)) * w + x];
            out[y * w + x] = acc;
        }
    return out;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    return v[mid];
}

// quadratic sub-pixel refinement along one axis, clamped to half a pixel
inline double parabolic_offset(double fm, double f0, double fp) {
    double denom = 2.0 * (2.0 * f0 - fm - fp);
    if (denom <= 0.0) return 0.0;
    return std::clamp((fp - fm) / denom, -0.5, 0.5);
}

} // namespace blob_detail

// Difference-of-Gaussians detector: band-pass at the emitter scale, robust
// adaptive threshold (median + k MAD-sigmas of the filtered image), greedy
// non-maximum suppression at a 2 sigma radius, parabolic sub-pixel peaks.
// Detections closer together than the resolution limit are kept but flagged.
inline std::vector<Blob> detect_blobs(const std::vector<double>& image, std::size_t width,
                                      std::size_t height, const BlobOptions& opt = {}) {
    if (image.size() != width * height || image.empty())
        throw std::invalid_argument("detect_blobs: image size does not match dimensions");
    if (!(opt.sigma_px > 0.0)) throw std::invalid_argument("detect_blobs: sigma must be > 0");

    auto fine = blob_detail::gaussian_blur(image, width, height, opt.sigma_px);
    auto coarse = blob_detail::gaussian_blur(image, width, height, 2.0 * opt.sigma_px);
    std::vector<double> dog(image.size());
    for (std::size_t i = 0; i < dog.size(); ++i) dog[i] = fine[i] - coarse[i];

    double med = blob_detail::median_of(dog);
    std::vector<double> dev(dog.size());
    for (std::size_t i = 0; i < dog.size(); ++i) dev[i] = std::abs(dog[i] - med);
    double mad_sigma = 1.4826 * blob_detail::median_of(dev);
    double cut = med + opt.threshold_sigmas * mad_sigma;

    long r = std::max(1l, static_cast<long>(std::lround(2.0 * opt.sigma_px)));
    struct Candidate {
        long x, y;
        double v;
    };
    std::vector<Candidate> cands;
    for (long y = 0; y < static_cast<long>(height); ++y)
        for (long x = 0; x < static_cast<long>(width); ++x) {
            double v = dog[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
            if (v <= cut) continue;
            bool is_max = true;
            for (long dy = -r; dy <= r && is_max; ++dy)
                for (long dx = -r; dx <= r && is_max; ++dx) {
                    long nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= static_cast<long>(width) ||
                        ny >= static_cast<long>(height) || (dx == 0 && dy == 0))
                        continue;
                    if (dog[static_cast<std::size_t>(ny) * width + static_cast<std::size_t>(nx)] >
                        v)
                        is_max = false;
                }
            if (is_max) cands.push_back({x, y, v});
        }

    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.v > b.v; });
    std::vector<Candidate> kept;
    for (const auto& c : cands) {
        bool suppressed = false;
        for (const auto& k : kept)
            if (std::abs(c.x - k.x) <= r && std::abs(c.y - k.y) <= r) suppressed = true;
        if (!suppressed) kept.push_back(c);
    }

    std::vector<Blob> blobs;
    for (const auto& c : kept) {
        Blob b;
        b.response = c.v;
        auto sample = [&](long x, long y) {
            x = std::clamp(x, 0l, static_cast<long>(width) - 1);
            y = std::clamp(y, 0l, static_cast<long>(height) - 1);
            return dog[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
        };
        b.x = static_cast<double>(c.x) +
              blob_detail::parabolic_offset(sample(c.x - 1, c.y), c.v, sample(c.x + 1, c.y));
        b.y = static_cast<double>(c.y) +
              blob_detail::parabolic_offset(sample(c.x, c.y - 1), c.v, sample(c.x, c.y + 1));
        blobs.push_back(b);
    }

    double limit = opt.ambiguity_factor * opt.sigma_px;
    for (std::size_t i = 0; i < blobs.size(); ++i)
        for (std::size_t j = i + 1; j < blobs.size(); ++j)
            if (std::hypot(blobs[i].x - blobs[j].x, blobs[i].y - blobs[j].y) < limit) {
                blobs[i].ambiguous = true;
                blobs[j].ambiguous = true;
            }
    return blobs;
}

} // namespace nvmx
