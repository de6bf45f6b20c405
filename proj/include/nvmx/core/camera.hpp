#pragma once

#include <stdexcept>

namespace nvmx {

// EMCCD model. A photoelectron entering the gain register comes out as a
// Gamma(n, em_gain) pulse in ADU equivalents; read noise is Gaussian and the
// photon-counting threshold adu_threshold sits above the bias by several
// read-noise sigma so empty pixels binarize to zero.
struct CameraModel {
    double em_gain = 5000.0;
    double read_noise_adu = 30.0;
    double bias_adu = 500.0;
    double adu_threshold = 650.0;  // per-pixel photon-counting cut
    int roi_n = 6;                 // side of the square extraction region
    double exposure_s = 5.0e-3;

    void validate() const {
        if (!(em_gain >= 1.0)) throw std::invalid_argument("CameraModel: em_gain must be >= 1");
        if (read_noise_adu < 0.0)
            throw std::invalid_argument("CameraModel: read_noise_adu must be >= 0");
        if (bias_adu < 0.0) throw std::invalid_argument("CameraModel: bias_adu must be >= 0");
        if (!(adu_threshold > bias_adu))
            throw std::invalid_argument("CameraModel: adu_threshold must exceed bias_adu");
        if (roi_n < 1) throw std::invalid_argument("CameraModel: roi_n must be >= 1");
        if (!(exposure_s > 0.0)) throw std::invalid_argument("CameraModel: exposure_s must be > 0");
    }
};

} // namespace nvmx
