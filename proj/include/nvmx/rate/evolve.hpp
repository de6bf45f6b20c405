#pragma once

#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include <nvmx/rate/model.hpp>

namespace nvmx {

// Propagate populations for a constant-intensity pulse of duration t via the
// matrix exponential of the generator. Exact for this linear model, so
// evolve(t1+t2) == evolve(t2) after evolve(t1) to solver precision.
inline LevelPopulations evolve(const RateModel& model, const LevelPopulations& p0,
                               double power_mw, double t_s) {
    if (t_s < 0.0) throw std::invalid_argument("evolve: duration must be >= 0");
    p0.validate();
    Eigen::Matrix3d prop = (model.generator(power_mw) * t_s).exp();
    Eigen::Vector3d v(p0.minus_ms0, p0.minus_ms1, p0.neutral);
    Eigen::Vector3d r = prop * v;
    LevelPopulations out{r(0), r(1), r(2)};
    // clip the tiny negative excursions the exponential can produce
    auto clip = [](double x) { return x < 0.0 && x > -1e-12 ? 0.0 : x; };
    out.minus_ms0 = clip(out.minus_ms0);
    out.minus_ms1 = clip(out.minus_ms1);
    out.neutral = clip(out.neutral);
    return out;
}

// Initial populations after charge and spin initialization. pi_pulse swaps
// which manifold holds the polarized spin population.
inline LevelPopulations scc_initial_state(double nv_minus_init, double spin_init_fidelity,
                                          bool pi_pulse) {
    if (nv_minus_init < 0.0 || nv_minus_init > 1.0)
        throw std::invalid_argument("scc_initial_state: nv_minus_init must be in [0, 1]");
    if (spin_init_fidelity < 0.0 || spin_init_fidelity > 1.0)
        throw std::invalid_argument("scc_initial_state: spin_init_fidelity must be in [0, 1]");
    double in_target = nv_minus_init * spin_init_fidelity;
    double in_other = nv_minus_init * (1.0 - spin_init_fidelity);
    LevelPopulations p;
    p.minus_ms0 = pi_pulse ? in_other : in_target;
    p.minus_ms1 = pi_pulse ? in_target : in_other;
    p.neutral = 1.0 - nv_minus_init;
    return p;
}

} // namespace nvmx
