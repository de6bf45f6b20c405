#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nvmx {

// Iterative radix-2 FFT, power-of-two lengths only. Hand-rolled rather than
// pulled in as a dependency because the holography path needs bitwise
// reproducible output across platforms and only ever runs on square
// power-of-two grids, where radix-2 is entirely adequate.
namespace fft_detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_inplace(std::complex<double>* x, std::size_t n, bool inverse) {
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = x[i + k];
                std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace fft_detail

// Unitary 2D FFT on a row-major width x height grid: a single 1/sqrt(W*H)
// scale per transform, so forward followed by inverse is the identity and
// total power is preserved exactly in exact arithmetic.
inline void fft2d(std::vector<std::complex<double>>& grid, std::size_t width, std::size_t height,
                  bool inverse = false) {
    if (grid.size() != width * height)
        throw std::invalid_argument("fft2d: grid size does not match dimensions");
    if (!fft_detail::is_pow2(width) || !fft_detail::is_pow2(height))
        throw std::invalid_argument("fft2d: dimensions must be powers of two");

    for (std::size_t y = 0; y < height; ++y)
        fft_detail::fft_inplace(grid.data() + y * width, width, inverse);

    std::vector<std::complex<double>> col(height);
    for (std::size_t x = 0; x < width; ++x) {
        for (std::size_t y = 0; y < height; ++y) col[y] = grid[y * width + x];
        fft_detail::fft_inplace(col.data(), height, inverse);
        for (std::size_t y = 0; y < height; ++y) grid[y * width + x] = col[y];
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(width * height));
    for (auto& v : grid) v *= scale;
}

// Swap quadrants so the DC component sits at (width/2, height/2). Applying it
// twice restores the original layout on even dimensions.
inline void fftshift2d(std::vector<std::complex<double>>& grid, std::size_t width,
                       std::size_t height) {
    if (grid.size() != width * height)
        throw std::invalid_argument("fftshift2d: grid size does not match dimensions");
    const std::size_t hw = width / 2, hh = height / 2;
    std::vector<std::complex<double>> tmp(grid.size());
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            tmp[((y + hh) % height) * width + (x + hw) % width] = grid[y * width + x];
    grid.swap(tmp);
}

} // namespace nvmx
