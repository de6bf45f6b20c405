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

struct T1Fit {
    double t1_s = 0.0;
    double t1_stderr_s = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double chi2 = 0.0;
    std::vector<double> residuals;
    // set when the data carry no resolvable decay (amplitude consistent
    // with zero), in which case t1_s is not meaningful
    bool degenerate = false;
};

struct RabiFit {
    double omega_rad_s = 0.0;   // angular Rabi frequency
    double pi_time_s = 0.0;
    double freq_stderr_hz = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;
    double decay_s = 0.0;       // envelope 1/e time
    double offset = 0.0;
    double chi2 = 0.0;
    std::vector<double> residuals;
};

namespace decay_detail {

inline void check_series(const std::vector<double>& t, const std::vector<double>& y,
                         const char* who) {
    if (t.size() != y.size()) throw std::invalid_argument(std::string(who) + ": grids must match");
    if (t.size() < 5) throw std::invalid_argument(std::string(who) + ": need >= 5 points");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument(std::string(who) + ": times must be increasing");
}

} // namespace decay_detail

// Single-exponential relaxation fit y = a exp(-t/T1) + c. The start values
// come from the endpoints (offset from the latest samples, amplitude from
// the earliest) and a log-linear slope through the early decay.
inline T1Fit fit_t1(const std::vector<double>& delays_s, const std::vector<double>& signals) {
    decay_detail::check_series(delays_s, signals, "fit_t1");
    const auto n = static_cast<Eigen::Index>(delays_s.size());

    double tail = 0.0;
    std::size_t n_tail = std::max<std::size_t>(1, delays_s.size() / 5);
    for (std::size_t i = delays_s.size() - n_tail; i < delays_s.size(); ++i) tail += signals[i];
    double c0 = tail / static_cast<double>(n_tail);
    double a0 = signals.front() - c0;
    if (a0 == 0.0) a0 = 1e-12;

    // slope of log|y - c| over the first half gives the rate
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < delays_s.size() / 2; ++i) {
        double d = (signals[i] - c0) / a0;
        if (d <= 0.05) continue;
        double ly = std::log(d);
        sx += delays_s[i];
        sy += ly;
        sxx += delays_s[i] * delays_s[i];
        sxy += delays_s[i] * ly;
        ++m;
    }
    double t1_0 = delays_s.back() / 3.0;
    if (m >= 2) {
        double denom = static_cast<double>(m) * sxx - sx * sx;
        if (denom > 0.0) {
            double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
            if (slope < 0.0) t1_0 = -1.0 / slope;
        }
    }
    t1_0 = std::clamp(t1_0, delays_s[1] * 0.1, delays_s.back() * 100.0);

    auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double e = std::exp(-delays_s[static_cast<std::size_t>(i)] / p(1));
            r(i) = p(0) * e + p(2) - signals[static_cast<std::size_t>(i)];
        }
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            double t = delays_s[static_cast<std::size_t>(i)];
            double e = std::exp(-t / p(1));
            j(i, 0) = e;
            j(i, 1) = p(0) * e * t / (p(1) * p(1));
            j(i, 2) = 1.0;
        }
        return j;
    };

    Eigen::VectorXd p0(3);
    p0 << a0, t1_0, c0;
    LevMarResult lm = levmar_fit(residual, jacobian, p0);

    // does the exponential actually beat a constant? Data without a real
    // decay send the optimizer down the a -> inf, T1 -> inf valley where a
    // line mimics the model, so the verdict cannot rely on the returned
    // parameters alone.
    double mean = 0.0;
    for (double v : signals) mean += v;
    mean /= static_cast<double>(signals.size());
    double chi2_const = 0.0;
    for (double v : signals) chi2_const += (v - mean) * (v - mean);
    double improve = chi2_const - lm.chi2;
    double dof = static_cast<double>(signals.size()) - 3.0;
    // both chi2 values carry summation noise of order (eps * |y|)^2 per
    // point, so an "improvement" below that floor is no improvement
    double y_scale = 0.0;
    for (double v : signals) y_scale = std::max(y_scale, std::abs(v));
    double tol = static_cast<double>(signals.size()) * 1e-26 * y_scale * y_scale;

    T1Fit fit;
    fit.degenerate = !lm.params.allFinite() || improve <= tol ||
                     (lm.chi2 > 0.0 && (improve / 2.0) / (lm.chi2 / dof) < 10.0);
    if (!fit.degenerate && (!lm.converged || !(lm.params(1) > 0.0)))
        throw std::runtime_error("fit_t1: fit did not converge");

    fit.amplitude = lm.params(0);
    fit.t1_s = lm.params(1);
    fit.offset = lm.params(2);
    fit.t1_stderr_s = std::sqrt(std::max(lm.covariance(1, 1), 0.0));
    fit.chi2 = lm.chi2;
    Eigen::VectorXd r = residual(lm.params);
    fit.residuals.assign(r.data(), r.data() + r.size());
    return fit;
}

// Damped oscillation fit y = a exp(-t/Td) cos(2 pi f t + phi) + c. The
// frequency start value comes from a dense projection scan, which keeps the
// nonlinear refinement out of the aliased local minima on either side.
inline RabiFit fit_rabi(const std::vector<double>& times_s, const std::vector<double>& signals) {
    decay_detail::check_series(times_s, signals, "fit_rabi");
    const auto n = static_cast<Eigen::Index>(times_s.size());

    double c0 = 0.0;
    for (double v : signals) c0 += v;
    c0 /= static_cast<double>(signals.size());
    double a0 = 0.0;
    for (double v : signals) a0 = std::max(a0, std::abs(v - c0));
    if (a0 == 0.0) a0 = 1e-12;

    // coarse periodogram: project onto cos/sin over a frequency grid from
    // one cycle per record up to Nyquist of the median spacing
    double span = times_s.back() - times_s.front();
    double dt_med = span / static_cast<double>(times_s.size() - 1);
    double f_lo = 0.5 / span, f_hi = 0.45 / dt_med;
    double best_f = f_lo, best_pow = -1.0, best_phase = 0.0;
    const int n_scan = 400;
    for (int k = 0; k <= n_scan; ++k) {
        double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(k) / n_scan);
        double pc = 0.0, ps = 0.0;
        for (std::size_t i = 0; i < times_s.size(); ++i) {
            double arg = kTwoPi * f * times_s[i];
            pc += (signals[i] - c0) * std::cos(arg);
            ps += (signals[i] - c0) * std::sin(arg);
        }
        double pw = pc * pc + ps * ps;
        if (pw > best_pow) {
            best_pow = pw;
            best_f = f;
            best_phase = std::atan2(-ps, pc);
        }
    }

    auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double t = times_s[static_cast<std::size_t>(i)];
            double e = std::exp(-t / p(3));
            r(i) = p(0) * e * std::cos(kTwoPi * p(1) * t + p(2)) + p(4) -
                   signals[static_cast<std::size_t>(i)];
        }
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(n, 5);
        for (Eigen::Index i = 0; i < n; ++i) {
            double t = times_s[static_cast<std::size_t>(i)];
            double e = std::exp(-t / p(3));
            double arg = kTwoPi * p(1) * t + p(2);
            double cosv = std::cos(arg), sinv = std::sin(arg);
            j(i, 0) = e * cosv;
            j(i, 1) = -p(0) * e * sinv * kTwoPi * t;
            j(i, 2) = -p(0) * e * sinv;
            j(i, 3) = p(0) * e * cosv * t / (p(3) * p(3));
            j(i, 4) = 1.0;
        }
        return j;
    };

    Eigen::VectorXd p0(5);
    p0 << a0, best_f, best_phase, std::max(span, 1e-12), c0;
    LevMarResult lm = levmar_fit(residual, jacobian, p0);
    if (!lm.converged || !lm.params.allFinite() || !(lm.params(1) > 0.0) ||
        !(lm.params(3) > 0.0))
        throw std::runtime_error("fit_rabi: fit did not converge");

    RabiFit fit;
    fit.amplitude = lm.params(0);
    fit.omega_rad_s = kTwoPi * lm.params(1);
    fit.pi_time_s = 0.5 / lm.params(1);
    fit.phase_rad = lm.params(2);
    fit.decay_s = lm.params(3);
    fit.offset = lm.params(4);
    fit.freq_stderr_hz = std::sqrt(std::max(lm.covariance(1, 1), 0.0));
    fit.chi2 = lm.chi2;
    Eigen::VectorXd r = residual(lm.params);
    fit.residuals.assign(r.data(), r.data() + r.size());
    return fit;
}

} // namespace nvmx
