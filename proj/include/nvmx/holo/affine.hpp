#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nvmx {

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

// Affine map between the commanded spot grid and what the camera measured:
// (x, y) -> (a x + b y + tx, c x + d y + ty).
struct AffineTransform {
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    PlanePoint apply(const PlanePoint& p) const {
        return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
    }
};

struct AffineFit {
    AffineTransform transform;
    double rms_residual = 0.0;      // per coordinate, so isotropic noise of sigma reads ~sigma
    std::vector<double> residuals;  // per-point Euclidean distance after mapping
};

// Least-squares affine calibration from commanded to measured positions.
// Needs at least three pairs spanning a nonzero area; collinear input leaves
// the normal system rank deficient and is rejected.
inline AffineFit calibrate_affine(const std::vector<PlanePoint>& commanded,
                                  const std::vector<PlanePoint>& measured) {
    if (commanded.size() != measured.size())
        throw std::invalid_argument("calibrate_affine: point lists differ in length");
    const std::size_t n = commanded.size();
    if (n < 3) throw std::invalid_argument("calibrate_affine: need at least 3 point pairs");

    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd mx(n), my(n);
    for (std::size_t i = 0; i < n; ++i) {
        design(static_cast<Eigen::Index>(i), 0) = commanded[i].x;
        design(static_cast<Eigen::Index>(i), 1) = commanded[i].y;
        design(static_cast<Eigen::Index>(i), 2) = 1.0;
        mx(static_cast<Eigen::Index>(i)) = measured[i].x;
        my(static_cast<Eigen::Index>(i)) = measured[i].y;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3)
        throw std::invalid_argument("calibrate_affine: commanded points are collinear");

    Eigen::Vector3d px = qr.solve(mx);
    Eigen::Vector3d py = qr.solve(my);

    AffineFit fit;
    fit.transform = {px(0), px(1), px(2), py(0), py(1), py(2)};
    fit.residuals.resize(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        PlanePoint pred = fit.transform.apply(commanded[i]);
        double dx = pred.x - measured[i].x, dy = pred.y - measured[i].y;
        fit.residuals[i] = std::sqrt(dx * dx + dy * dy);
        ss += dx * dx + dy * dy;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(2 * n));
    return fit;
}

} // namespace nvmx
