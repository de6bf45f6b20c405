#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace nvmx {

struct LevMarOptions {
    int max_iter = 200;
    double rel_tol = 1e-12;  // converged when a step improves the cost by less than this fraction
    double lambda_init = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double lambda_max = 1e12;
};

struct LevMarResult {
    Eigen::VectorXd params;
    bool converged = false;
    int iterations = 0;
    double chi2 = 0.0;
    Eigen::MatrixXd covariance;  // chi2/(m-n) * (J^T J)^-1 at the solution
};

// Dense Levenberg-Marquardt for small curve fits. The caller supplies the
// residual vector r(p) and its Jacobian J(p); the fit minimizes |r|^2.
// Shared by the localization and spectroscopy fitting code, which all have
// a handful of parameters and at most a few thousand residuals.
inline LevMarResult levmar_fit(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
    const Eigen::VectorXd& initial, const LevMarOptions& opt = {}) {
    LevMarResult res;
    Eigen::VectorXd p = initial;
    Eigen::VectorXd r = residual(p);
    double cost = r.squaredNorm();
    double lambda = opt.lambda_init;

    int it = 0;
    for (; it < opt.max_iter && !res.converged; ++it) {
        Eigen::MatrixXd j = jacobian(p);
        Eigen::MatrixXd jtj = j.transpose() * j;
        Eigen::VectorXd jtr = j.transpose() * r;

        bool step_taken = false;
        while (lambda <= opt.lambda_max) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
            if (delta.allFinite()) {
                Eigen::VectorXd p_try = p + delta;
                Eigen::VectorXd r_try = residual(p_try);
                double cost_try = r_try.squaredNorm();
                if (std::isfinite(cost_try) && cost_try < cost) {
                    double gain = (cost - cost_try) / std::max(cost, 1e-300);
                    p = p_try;
                    r = r_try;
                    cost = cost_try;
                    lambda = std::max(lambda * opt.lambda_down, 1e-12);
                    step_taken = true;
                    if (gain < opt.rel_tol) res.converged = true;
                    break;
                }
            }
            lambda *= opt.lambda_up;
        }
        if (!step_taken) {
            // no direction improves the cost any more: we are at a minimum,
            // possibly the initial point itself. Whether the minimum is any
            // good is for the caller to judge from chi2 and the parameters.
            res.converged = true;
            ++it;
            break;
        }
    }

    res.params = p;
    res.iterations = it;
    res.chi2 = cost;

    Eigen::MatrixXd j = jacobian(p);
    Eigen::MatrixXd jtj = j.transpose() * j;
    auto m = static_cast<double>(j.rows());
    auto n = static_cast<double>(j.cols());
    double dof = std::max(m - n, 1.0);
    // covariance from the scaled normal matrix: dividing rows and columns by
    // sqrt(diag) first keeps parameters of wildly different magnitudes (say
    // seconds next to hertz) from masquerading as a singular system. A
    // genuinely unconstrained parameter still comes back singular, and then
    // only the error estimate is withdrawn (NaN), not the convergence
    // verdict: the point may be a perfectly good minimum.
    res.covariance = Eigen::MatrixXd::Constant(j.cols(), j.cols(),
                                               std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd d = jtj.diagonal();
    if ((d.array() > 0.0).all()) {
        Eigen::VectorXd s = d.array().rsqrt();
        Eigen::MatrixXd scaled = s.asDiagonal() * jtj * s.asDiagonal();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
        if (lu.isInvertible())
            res.covariance =
                s.asDiagonal() * lu.inverse() * s.asDiagonal() * (cost / dof);
    }
    return res;
}

} // namespace nvmx
