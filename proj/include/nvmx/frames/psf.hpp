#pragma once

#include <stdexcept>

namespace nvmx {

// Isotropic Gaussian stand-in for the microscope point-spread function.
// Good enough for sub-pixel localization and thresholded counting; Airy
// rings would only matter well below the noise floors simulated here.
struct PSFModel {
    double sigma_px = 1.3;
    double amplitude = 1.0;

    void validate() const {
        if (!(sigma_px > 0.0)) throw std::invalid_argument("PSFModel: sigma_px must be > 0");
        if (!(amplitude > 0.0)) throw std::invalid_argument("PSFModel: amplitude must be > 0");
    }
};

} // namespace nvmx
