#pragma once

namespace nvmx {

// CODATA values; g_factor is the NV electron g-factor (very close to the
// free-electron value, 2 is the convention used throughout).
struct PhysConstants {
    double planck_h = 6.62607015e-34;    // J s
    double mu_bohr = 9.2740100783e-24;   // J/T
    double g_factor = 2.0;

    // h / (g mu_B), the field-per-frequency slope of the Zeeman shift.
    // Evaluates to 3.5724e-11 T s.
    double field_per_hz() const { return planck_h / (g_factor * mu_bohr); }

    // gamma = g mu_B / hbar in rad s^-1 T^-1 (about 1.761e11).
    double gyromagnetic_rad() const {
        double hbar = planck_h / 6.283185307179586476925286766559;
        return g_factor * mu_bohr / hbar;
    }
};

inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace nvmx
