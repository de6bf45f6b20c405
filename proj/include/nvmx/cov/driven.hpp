#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include <nvmx/core/constants.hpp>
#include <nvmx/cov/experiment.hpp>

namespace nvmx {

// One point of the driven-spin correlation experiment: even-numbered shots
// rotate every spin by theta, odd-numbered shots by theta + pi. The parity
// interleave cancels slow drifts; sweeping theta traces out the correlation
// oscillation whose amplitude calibrates the pair readout noise.
struct DrivenSequence {
    double theta_rad = 0.0;
    // per-site preparation: true flips the initial spin, so that site swings
    // out of phase with the others and its pair correlators go negative
    std::vector<std::uint8_t> opposite;

    void validate() const {
        if (!(theta_rad >= 0.0 && theta_rad < kTwoPi))
            throw std::invalid_argument("DrivenSequence: theta must lie in [0, 2*pi)");
        if (opposite.size() < 2)
            throw std::invalid_argument("DrivenSequence: need at least 2 sites");
    }
};

struct DrivenConfig {
    std::vector<double> thetas_rad;      // sweep grid
    std::vector<std::uint8_t> opposite;  // per-site initial-state flags
    SccReadout readout;                  // shared by all sites
    std::size_t n_shots = 100000;        // per theta point, both parities pooled
    std::size_t baseline_shots = 0;      // 0 means reuse n_shots
    double gain_sigma = 0.0;             // common multiplicative readout noise
    bool per_pair_baseline = false;
    std::uint64_t seed = 1;

    void validate() const {
        if (thetas_rad.empty())
            throw std::invalid_argument("DrivenConfig: empty theta grid");
        for (double t : thetas_rad) {
            DrivenSequence seq;
            seq.theta_rad = t;
            seq.opposite = opposite;
            seq.validate();
        }
        if (n_shots < 1000)
            throw std::invalid_argument("DrivenConfig: need at least 1000 shots per point");
        if (!(gain_sigma >= 0.0))
            throw std::invalid_argument("DrivenConfig: gain spread must be >= 0");
        readout.validate();
    }
};

// Expected baseline-free correlator of the driven experiment. Rotating a
// spin prepared in |0> by alpha leaves flip probability sin^2(alpha/2), so
// between the two parities the mean signal of every site swings by an amount
// proportional to cos(theta). Synchronized swings give cos^2(theta), scaled
// down by both sites' readout noise; an opposite-prepared site swings the
// other way and flips the sign. Quantum projection noise and the parity
// split trade off so the per-site variance stays flat in theta, which is why
// the plain cos^2 shows up in the normalized correlator.
inline double expected_driven_correlation(double theta_rad, bool opposite_i, bool opposite_j,
                                          double sigma_ri, double sigma_rj) {
    double c = std::cos(theta_rad);
    double sign = (opposite_i != opposite_j) ? -1.0 : 1.0;
    return sign * c * c / (sigma_ri * sigma_rj);
}

inline SweepResult simulate_driven(const DrivenConfig& cfg) {
    cfg.validate();
    std::size_t k = cfg.opposite.size();
    RngStream base = RngStream::root(cfg.seed);

    std::size_t cal_shots = cfg.baseline_shots ? cfg.baseline_shots : cfg.n_shots;
    BaselineCalibration cal =
        calibrate_baseline(k, cfg.readout, cal_shots, cfg.gain_sigma, base);

    SweepResult out;
    out.baseline = cal.scalar;
    out.baseline_pairs = cal.pairs;
    out.records.reserve(cfg.thetas_rad.size() * k * (k - 1) / 2);

    std::vector<double> y(k);
    for (std::size_t t = 0; t < cfg.thetas_rad.size(); ++t) {
        double theta = cfg.thetas_rad[t];
        CovAccumulator acc(k);
        for (std::size_t s = 0; s < cfg.n_shots; ++s) {
            RngStream rng = base.child(kCovShotTag, t, s);
            double gain = draw_gain(rng, cfg.gain_sigma);
            // odd shots add pi to the drive angle
            double angle = (s & 1) ? theta + kPi : theta;
            double p_flip = 0.5 * (1.0 - std::cos(angle));
            for (std::size_t j = 0; j < k; ++j) {
                double p1 = cfg.opposite[j] ? 1.0 - p_flip : p_flip;
                int spin = rng.bernoulli(p1) ? 1 : 0;
                y[j] = cfg.readout.sample(spin, rng, gain);
            }
            acc.add(y);
        }
        std::vector<CorrelationRecord> pairs = acc.all_pairs();
        if (cfg.per_pair_baseline)
            subtract_baseline(pairs, cal.pairs);
        else
            subtract_baseline(pairs, cal.scalar);
        for (const auto& rec : pairs) out.records.push_back({theta, rec});
    }
    return out;
}

// Least-squares description of one pair's r(theta) curve. The model
// c0 + c1 cos(2 theta) + c2 sin(2 theta) spans every curve of the form
// offset + A cos^2(theta - theta0); amplitude keeps the sign of the cos(2t)
// component so opposite-state pairs come out negative.
struct DrivenCurveFit {
    double offset = 0.0;          // fitted mean level, includes half the amplitude
    double amplitude = 0.0;       // signed peak-to-trough height A
    double amplitude_stderr = 0.0;
    double theta_extremum_rad = 0.0; // strongest-|r| angle folded into (-pi/2, pi/2]
    double rms_residual = 0.0;
};

inline DrivenCurveFit fit_driven_curve(const std::vector<double>& thetas_rad,
                                       const std::vector<double>& r) {
    if (thetas_rad.size() != r.size())
        throw std::invalid_argument("fit_driven_curve: grid and data lengths differ");
    std::size_t n = thetas_rad.size();
    if (n < 4)
        throw std::invalid_argument("fit_driven_curve: need at least 4 points for 3 parameters");

    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd b(n);
    for (std::size_t m = 0; m < n; ++m) {
        x(m, 0) = 1.0;
        x(m, 1) = std::cos(2.0 * thetas_rad[m]);
        x(m, 2) = std::sin(2.0 * thetas_rad[m]);
        b(m) = r[m];
    }
    Eigen::Matrix3d xtx = x.transpose() * x;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(xtx);
    if (!lu.isInvertible())
        throw std::invalid_argument("fit_driven_curve: degenerate theta grid");
    Eigen::Vector3d c = lu.solve(x.transpose() * b);

    DrivenCurveFit fit;
    fit.offset = c(0);
    double h = std::hypot(c(1), c(2));
    double sign = c(1) < 0.0 ? -1.0 : 1.0;
    fit.amplitude = 2.0 * sign * h;
    // extremum of sign * r; atan2(0, 0) is defined as 0, covering a flat fit
    fit.theta_extremum_rad = 0.5 * std::atan2(sign * c(2), sign * c(1));

    Eigen::VectorXd res = b - x * c;
    double rss = res.squaredNorm();
    fit.rms_residual = std::sqrt(rss / static_cast<double>(n));
    if (n > 3 && h > 0.0) {
        double s2 = rss / static_cast<double>(n - 3);
        Eigen::Matrix3d cov = lu.inverse() * s2;
        double cw = c(1) / h, sw = c(2) / h;
        double va = cw * cw * cov(1, 1) + sw * sw * cov(2, 2) + 2.0 * cw * sw * cov(1, 2);
        fit.amplitude_stderr = 2.0 * std::sqrt(std::max(va, 0.0));
    }
    return fit;
}

} // namespace nvmx
