#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nvmx {

// One emitter in the field of view. Positions are in camera pixels
// (fractional), photon numbers are per readout.
struct NVSite {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    int orientation_family = 0;   // 0..3, one of the four crystal axes

    // Mean detected photons per readout in the dark (ionized) and bright
    // (negative) charge state.
    double lambda0 = 1.6;
    double lambda1 = 6.7;

    double t1_s = 1.0e-3;          // spin-lattice relaxation time
    double t2_xy8_s = 15.0e-6;     // coherence time under the XY8 preset
    double rabi_hz = 5.0e6;

    double nv_minus_init = 0.7;        // charge polarization after init
    double spin_init_fidelity = 0.95;  // population in the intended m_s state

    void validate() const {
        auto fail = [this](const std::string& what) {
            throw std::invalid_argument("NVSite id=" + std::to_string(id) + ": " + what);
        };
        if (!std::isfinite(x) || !std::isfinite(y)) fail("position must be finite");
        if (orientation_family < 0 || orientation_family > 3)
            fail("orientation_family must be in [0, 3]");
        if (!(lambda0 >= 0.0)) fail("lambda0 must be >= 0");
        if (!(lambda1 > lambda0)) fail("lambda1 must exceed lambda0");
        if (!(t1_s > 0.0)) fail("t1_s must be > 0");
        if (!(t2_xy8_s > 0.0)) fail("t2_xy8_s must be > 0");
        if (!(rabi_hz > 0.0)) fail("rabi_hz must be > 0");
        if (nv_minus_init < 0.0 || nv_minus_init > 1.0) fail("nv_minus_init must be in [0, 1]");
        if (spin_init_fidelity < 0.0 || spin_init_fidelity > 1.0)
            fail("spin_init_fidelity must be in [0, 1]");
    }
};

} // namespace nvmx
