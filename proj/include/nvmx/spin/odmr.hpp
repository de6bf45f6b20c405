#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include <nvmx/core/constants.hpp>
#include <nvmx/math/levmar.hpp>

namespace nvmx {

// One resonance dip in a normalized CW spectrum. fwhm_hz is the full width
// at half depth, contrast the fractional fluorescence drop at line center.
struct LorentzianDip {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
    double contrast = 0.0;

    void validate() const {
        if (!(fwhm_hz > 0.0)) throw std::invalid_argument("LorentzianDip: fwhm must be > 0");
        if (!(contrast > 0.0 && contrast < 1.0))
            throw std::invalid_argument("LorentzianDip: contrast must be in (0, 1)");
        if (!std::isfinite(center_hz))
            throw std::invalid_argument("LorentzianDip: center must be finite");
    }
};

struct OdmrFit {
    std::vector<LorentzianDip> dips;
    std::vector<LorentzianDip> stderrs;  // same layout, entries are 1-sigma errors
    double i0_cps = 0.0;                 // off-resonance fluorescence rate
    double chi2 = 0.0;
    int iterations = 0;
};

// Normalized fluorescence at one probe frequency: unity off resonance minus
// a Lorentzian per dip. Overlapping dips just stack, which can push a
// pathological model below zero; validate() keeps single dips in (0, 1].
inline double odmr_model(const std::vector<LorentzianDip>& dips, double freq_hz) {
    double v = 1.0;
    for (const auto& d : dips) {
        double hw = 0.5 * d.fwhm_hz;
        double df = freq_hz - d.center_hz;
        v -= d.contrast * hw * hw / (df * df + hw * hw);
    }
    return v;
}

inline std::vector<double> odmr_model(const std::vector<LorentzianDip>& dips,
                                      const std::vector<double>& freqs_hz) {
    std::vector<double> out(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) out[i] = odmr_model(dips, freqs_hz[i]);
    return out;
}

// Picks starting dips for the fit: the n deepest local minima that sit at
// least one estimated linewidth apart, with the width read off from where
// the spectrum recovers to half depth.
inline std::vector<LorentzianDip> guess_dips(const std::vector<double>& freqs_hz,
                                             const std::vector<double>& values,
                                             std::size_t n_dips) {
    if (freqs_hz.size() != values.size() || freqs_hz.size() < 5)
        throw std::invalid_argument("guess_dips: need matching grids with >= 5 points");
    if (n_dips == 0) throw std::invalid_argument("guess_dips: n_dips must be >= 1");

    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<LorentzianDip> dips;
    for (std::size_t idx : order) {
        if (dips.size() == n_dips) break;
        double depth = 1.0 - values[idx];
        if (depth <= 0.0) break;

        // walk outward to the half-depth crossings
        double half = 1.0 - 0.5 * depth;
        std::size_t lo = idx, hi = idx;
        while (lo > 0 && values[lo] < half) --lo;
        while (hi + 1 < values.size() && values[hi] < half) ++hi;
        double width = std::max(freqs_hz[hi] - freqs_hz[lo],
                                freqs_hz[1] - freqs_hz[0]);

        bool taken = false;
        for (const auto& d : dips)
            if (std::abs(d.center_hz - freqs_hz[idx]) < std::max(width, d.fwhm_hz))
                taken = true;
        if (taken) continue;

        LorentzianDip d;
        d.center_hz = freqs_hz[idx];
        d.fwhm_hz = width;
        d.contrast = std::clamp(depth, 1e-4, 0.999);
        dips.push_back(d);
    }
    if (dips.size() < n_dips)
        throw std::runtime_error("guess_dips: spectrum has fewer resolvable dips than requested");
    return dips;
}

// Least-squares refinement of all dip parameters at once. i0_cps passes
// straight through to the result; the normalized shape carries no rate
// information of its own.
inline OdmrFit fit_odmr(const std::vector<double>& freqs_hz, const std::vector<double>& values,
                        const std::vector<LorentzianDip>& initial, double i0_cps) {
    if (freqs_hz.size() != values.size())
        throw std::invalid_argument("fit_odmr: grids must match");
    if (initial.empty()) throw std::invalid_argument("fit_odmr: need at least one initial dip");
    if (freqs_hz.size() < 3 * initial.size() + 1)
        throw std::invalid_argument("fit_odmr: more parameters than points");
    if (!(i0_cps > 0.0)) throw std::invalid_argument("fit_odmr: i0_cps must be > 0");

    const std::size_t nd = initial.size();
    const auto n = static_cast<Eigen::Index>(freqs_hz.size());

    auto unpack = [nd](const Eigen::VectorXd& p) {
        std::vector<LorentzianDip> dips(nd);
        for (std::size_t k = 0; k < nd; ++k) {
            dips[k].center_hz = p(static_cast<Eigen::Index>(3 * k));
            dips[k].fwhm_hz = p(static_cast<Eigen::Index>(3 * k + 1));
            dips[k].contrast = p(static_cast<Eigen::Index>(3 * k + 2));
        }
        return dips;
    };
    auto residual = [&](const Eigen::VectorXd& p) {
        auto dips = unpack(p);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i)
            r(i) = odmr_model(dips, freqs_hz[static_cast<std::size_t>(i)]) -
                   values[static_cast<std::size_t>(i)];
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
        auto dips = unpack(p);
        Eigen::MatrixXd j(n, static_cast<Eigen::Index>(3 * nd));
        for (Eigen::Index i = 0; i < n; ++i) {
            double f = freqs_hz[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < nd; ++k) {
                double hw = 0.5 * dips[k].fwhm_hz;
                double df = f - dips[k].center_hz;
                double den = df * df + hw * hw;
                double lor = hw * hw / den;
                // d(model)/d(center): note model subtracts the Lorentzian
                j(i, static_cast<Eigen::Index>(3 * k)) =
                    -dips[k].contrast * 2.0 * hw * hw * df / (den * den);
                // d/d(fwhm) = c * hw * df^2 / den^2 * d(hw)/d(fwhm)
                j(i, static_cast<Eigen::Index>(3 * k + 1)) =
                    -dips[k].contrast * hw * df * df / (den * den);
                j(i, static_cast<Eigen::Index>(3 * k + 2)) = -lor;
            }
        }
        return j;
    };

    Eigen::VectorXd p0(static_cast<Eigen::Index>(3 * nd));
    for (std::size_t k = 0; k < nd; ++k) {
        initial[k].validate();
        p0(static_cast<Eigen::Index>(3 * k)) = initial[k].center_hz;
        p0(static_cast<Eigen::Index>(3 * k + 1)) = initial[k].fwhm_hz;
        p0(static_cast<Eigen::Index>(3 * k + 2)) = initial[k].contrast;
    }

    LevMarResult lm = levmar_fit(residual, jacobian, p0);
    if (!lm.converged || !lm.params.allFinite())
        throw std::runtime_error("fit_odmr: fit did not converge");

    OdmrFit fit;
    fit.dips = unpack(lm.params);
    fit.stderrs.resize(nd);
    for (std::size_t k = 0; k < nd; ++k) {
        fit.dips[k].fwhm_hz = std::abs(fit.dips[k].fwhm_hz);
        fit.dips[k].validate();
        auto i0 = static_cast<Eigen::Index>(3 * k);
        fit.stderrs[k].center_hz = std::sqrt(std::max(lm.covariance(i0, i0), 0.0));
        fit.stderrs[k].fwhm_hz = std::sqrt(std::max(lm.covariance(i0 + 1, i0 + 1), 0.0));
        fit.stderrs[k].contrast = std::sqrt(std::max(lm.covariance(i0 + 2, i0 + 2), 0.0));
    }
    std::sort(fit.dips.begin(), fit.dips.end(),
              [](const LorentzianDip& a, const LorentzianDip& b) {
                  return a.center_hz < b.center_hz;
              });
    fit.i0_cps = i0_cps;
    fit.chi2 = lm.chi2;
    fit.iterations = lm.iterations;
    return fit;
}

// Groups resonance frequencies into crystallographic orientation families by
// splitting the sorted list wherever neighbours are further apart than
// gap_hz. With a bias field along no particular axis the four families are
// typically tens of MHz apart while within-family structure stays below a
// few MHz, so the default threshold sits between those scales.
inline std::vector<int> assign_families(const std::vector<double>& centers_hz,
                                        double gap_hz = 10.0e6) {
    if (!(gap_hz > 0.0)) throw std::invalid_argument("assign_families: gap must be > 0");
    std::vector<std::size_t> order(centers_hz.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return centers_hz[a] < centers_hz[b]; });

    std::vector<int> family(centers_hz.size(), 0);
    int current = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && centers_hz[order[i]] - centers_hz[order[i - 1]] > gap_hz) ++current;
        family[order[i]] = current;
    }
    return family;
}

// Shot-noise-limited DC sensitivity of one resonance. The leading factor
// h/(g mu_B) converts linewidth to field; wider or shallower lines and
// dimmer emitters all cost sensitivity.
inline double dc_sensitivity(double fwhm_hz, double contrast, double i0_cps,
                             const PhysConstants& pc = {}) {
    if (!(fwhm_hz > 0.0)) throw std::invalid_argument("dc_sensitivity: fwhm must be > 0");
    if (!(contrast > 0.0 && contrast < 1.0))
        throw std::invalid_argument("dc_sensitivity: contrast must be in (0, 1)");
    if (!(i0_cps > 0.0)) throw std::invalid_argument("dc_sensitivity: i0 must be > 0");
    return pc.field_per_hz() * fwhm_hz / (contrast * std::sqrt(i0_cps));
}

inline double dc_sensitivity(const OdmrFit& fit, std::size_t dip_idx,
                             const PhysConstants& pc = {}) {
    if (dip_idx >= fit.dips.size())
        throw std::invalid_argument("dc_sensitivity: dip index out of range");
    const auto& d = fit.dips[dip_idx];
    return dc_sensitivity(d.fwhm_hz, d.contrast, fit.i0_cps, pc);
}

} // namespace nvmx
