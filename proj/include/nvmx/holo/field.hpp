#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <nvmx/core/constants.hpp>
#include <nvmx/holo/fft.hpp>

namespace nvmx {

// SLM phase mask. Phases are stored wrapped to [0, 2pi).
struct PhasePattern {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> phase;
    double wavelength_m = 594e-9;
    double pixel_pitch_m = 8e-6;

    double& at(std::size_t x, std::size_t y) { return phase[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return phase[y * width + x]; }

    void validate() const {
        if (width == 0 || height == 0 || phase.size() != width * height)
            throw std::invalid_argument("PhasePattern: phase buffer does not match dimensions");
        for (double p : phase)
            if (!(p >= 0.0) || p >= kTwoPi)
                throw std::invalid_argument("PhasePattern: phases must lie in [0, 2pi)");
        if (!(wavelength_m > 0.0) || !(pixel_pitch_m > 0.0))
            throw std::invalid_argument("PhasePattern: wavelength and pitch must be > 0");
    }
};

inline double wrap_phase(double p) {
    double w = std::fmod(p, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod can round up to the period itself when p is a tiny negative number
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// One requested far-field spot. Coordinates are camera pixels in the shifted
// (DC-at-center) frame; amplitude is relative to the other targets.
struct SpotTarget {
    double kx = 0.0;
    double ky = 0.0;
    double amplitude = 1.0;
};

struct SpotTargets {
    std::vector<SpotTarget> spots;

    void validate(std::size_t width, std::size_t height) const {
        if (spots.empty()) throw std::invalid_argument("SpotTargets: no targets");
        for (const auto& s : spots) {
            if (!(s.amplitude > 0.0))
                throw std::invalid_argument("SpotTargets: amplitudes must be > 0");
            if (s.kx < 0.0 || s.kx >= static_cast<double>(width) || s.ky < 0.0 ||
                s.ky >= static_cast<double>(height))
                throw std::invalid_argument("SpotTargets: target outside the far-field grid");
        }
        for (std::size_t i = 0; i < spots.size(); ++i)
            for (std::size_t j = i + 1; j < spots.size(); ++j)
                if (spots[i].kx == spots[j].kx && spots[i].ky == spots[j].ky)
                    throw std::invalid_argument("SpotTargets: duplicate target position");
    }
};

// Far-field intensity with DC at (width/2, height/2).
struct FarField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> intensity;

    double at(std::size_t x, std::size_t y) const { return intensity[y * width + x]; }
    double total_energy() const {
        double e = 0.0;
        for (double v : intensity) e += v;
        return e;
    }
};

// Lens Fourier-plane propagation: far field = shifted unitary FFT of
// aperture * exp(i phase). The unitary scaling makes Parseval exact, so
// total far-field energy equals total aperture energy.
inline FarField propagate(const PhasePattern& p, const std::vector<double>& aperture) {
    p.validate();
    if (aperture.size() != p.phase.size())
        throw std::invalid_argument("propagate: aperture dimensions do not match the mask");

    std::vector<std::complex<double>> field(p.phase.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        field[i] = std::polar(aperture[i], p.phase[i]);
    fft2d(field, p.width, p.height);
    fftshift2d(field, p.width, p.height);

    FarField out;
    out.width = p.width;
    out.height = p.height;
    out.intensity.resize(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out.intensity[i] = std::norm(field[i]);
    return out;
}

inline FarField propagate(const PhasePattern& p) {
    return propagate(p, std::vector<double>(p.phase.size(), 1.0));
}

} // namespace nvmx
