#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/photon/mixture.hpp>

namespace nvmx {

struct DoublePoissonFit {
    PoissonMixture mixture;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    // Set when the two components landed on (numerically) the same rate, i.e.
    // the data carry no evidence of a second component. w_minus is then not
    // meaningful.
    bool degenerate = false;
};

namespace fit_detail {

struct Moments {
    double total = 0.0;
    double mean = 0.0;
    double fact2 = 0.0;  // E[k(k-1)]
    double fact3 = 0.0;  // E[k(k-1)(k-2)]
};

inline Moments moments(const CountHistogram& h) {
    Moments m;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        double w = h[k];
        if (w < 0.0) throw std::invalid_argument("fit_double_poisson: negative histogram weight");
        double kd = static_cast<double>(k);
        m.total += w;
        s1 += w * kd;
        s2 += w * kd * (kd - 1.0);
        s3 += w * kd * (kd - 1.0) * (kd - 2.0);
    }
    if (!(m.total > 0.0)) throw std::invalid_argument("fit_double_poisson: empty histogram");
    m.mean = s1 / m.total;
    m.fact2 = s2 / m.total;
    m.fact3 = s3 / m.total;
    return m;
}

// Method-of-moments start: for a two-Poisson mixture the factorial moments
// satisfy a linear recurrence whose characteristic roots are the two rates.
// Falls back to a split-at-the-mean start when the moment system is singular
// or gives unusable roots (pure-Poisson data, tiny samples).
inline bool prony_init(const Moments& m, double& a, double& b, double& w) {
    double e1 = m.mean, e2 = m.fact2, e3 = m.fact3;
    double det = e1 * e1 - e2;
    if (std::abs(det) < 1e-12 * std::max(1.0, e2)) return false;
    double c1 = (e1 * e2 - e3) / det;
    double c0 = (e1 * e3 - e2 * e2) / det;
    // roots of x^2 - c1 x - c0... the recurrence is e_{n+1} = c1 e_n + c0 e_{n-1}
    double disc = c1 * c1 + 4.0 * c0;
    if (disc <= 0.0) return false;
    double r = std::sqrt(disc);
    a = 0.5 * (c1 - r);
    b = 0.5 * (c1 + r);
    if (!(a >= 0.0) || !(b > a)) return false;
    w = (e1 - a) / (b - a);
    if (!(w > 1e-4) || !(w < 1.0 - 1e-4)) return false;
    return true;
}

inline void split_init(const CountHistogram& h, const Moments& m, double& a, double& b, double& w) {
    double lo_w = 0.0, lo_s = 0.0, hi_w = 0.0, hi_s = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        double kd = static_cast<double>(k);
        if (kd < m.mean) {
            lo_w += h[k];
            lo_s += h[k] * kd;
        } else {
            hi_w += h[k];
            hi_s += h[k] * kd;
        }
    }
    a = lo_w > 0.0 ? lo_s / lo_w : 0.5 * m.mean;
    b = hi_w > 0.0 ? hi_s / hi_w : m.mean + 1.0;
    if (b <= a + 1e-9) b = a + std::max(0.5, 0.25 * (a + 1.0));
    w = hi_w / (lo_w + hi_w);
    w = std::clamp(w, 1e-3, 1.0 - 1e-3);
}

inline double loglik(const CountHistogram& h, double a, double b, double w) {
    double ll = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (h[k] <= 0.0) continue;
        double p = (1.0 - w) * poisson_pmf(k, a) + w * poisson_pmf(k, b);
        ll += h[k] * std::log(std::max(p, 1e-300));
    }
    return ll;
}

} // namespace fit_detail

// EM fit of a two-component Poisson mixture to a count histogram. Starts from
// the moment solution (whose likelihood EM can only improve), iterates to a
// relative log-likelihood change below rel_tol, and orders the result so
// lambda0 <= lambda1 with w_minus the weight of the brighter component.
inline DoublePoissonFit fit_double_poisson(const CountHistogram& hist, double rel_tol = 1e-8,
                                           int max_iter = 500) {
    using namespace fit_detail;
    Moments m = moments(hist);

    DoublePoissonFit out;
    double degen_tol = std::max(0.5 * std::sqrt(std::max(m.mean, 0.0)), 0.05);

    // Single support point: nothing to separate.
    double var = m.fact2 + m.mean - m.mean * m.mean;
    if (var <= 0.0) {
        out.mixture = {m.mean, m.mean, 0.5};
        out.loglik = loglik(hist, m.mean, m.mean, 0.5);
        out.converged = true;
        out.degenerate = true;
        return out;
    }

    double a, b, w;
    if (!prony_init(m, a, b, w)) split_init(hist, m, a, b, w);

    double ll = loglik(hist, a, b, w);
    int it = 0;
    for (; it < max_iter; ++it) {
        double sw = 0.0, s1 = 0.0, sk0 = 0.0, sk1 = 0.0, s0 = 0.0;
        for (std::size_t k = 0; k < hist.size(); ++k) {
            if (hist[k] <= 0.0) continue;
            double p0 = (1.0 - w) * poisson_pmf(k, a);
            double p1 = w * poisson_pmf(k, b);
            double tot = p0 + p1;
            double r1 = tot > 0.0 ? p1 / tot : 0.5;
            double wk = hist[k];
            double kd = static_cast<double>(k);
            sw += wk;
            s1 += wk * r1;
            s0 += wk * (1.0 - r1);
            sk1 += wk * r1 * kd;
            sk0 += wk * (1.0 - r1) * kd;
        }
        w = s1 / sw;
        a = s0 > 0.0 ? sk0 / s0 : 0.0;
        b = s1 > 0.0 ? sk1 / s1 : 0.0;
        double ll_new = loglik(hist, a, b, w);
        bool done = std::abs(ll_new - ll) <= rel_tol * std::max(std::abs(ll_new), 1.0);
        ll = ll_new;
        if (done) {
            out.converged = true;
            ++it;
            break;
        }
    }

    if (a > b) {
        std::swap(a, b);
        w = 1.0 - w;
    }
    out.mixture = {a, b, w};
    out.loglik = ll;
    out.iterations = it;

    // Three ways a two-component answer can be meaningless: the components
    // collapsed onto each other, one of them carries no weight, or the pair
    // explains the data no better than a single Poisson at the sample mean
    // (likelihood-ratio statistic below any plausible significance cut).
    double ll_single = loglik(hist, m.mean, m.mean, 0.5);
    out.degenerate = (b - a) < degen_tol || std::min(w, 1.0 - w) < 1e-3 ||
                     2.0 * (ll - ll_single) < 10.0;
    return out;
}

inline DoublePoissonFit fit_double_poisson(const std::vector<std::uint64_t>& samples,
                                           double rel_tol = 1e-8, int max_iter = 500) {
    return fit_double_poisson(histogram_from_samples(samples), rel_tol, max_iter);
}

} // namespace nvmx
