#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nvmx/math/levmar.hpp>

namespace nvmx {

struct RoiRect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t width = 0;
    std::size_t height = 0;
};

struct Gauss2dFit {
    double amplitude = 0.0;
    double x0 = 0.0;  // in full-image pixel coordinates
    double y0 = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    Eigen::MatrixXd covariance;  // parameter order (A, x0, y0, sigma, offset)
    double chi2 = 0.0;
    int iterations = 0;
};

// Least-squares isotropic 2D Gaussian peak fit over an ROI. Throws when the
// optimizer stalls or when the fitted peak is not significant against its own
// uncertainty, which is what a flat or peak-free ROI produces.
inline Gauss2dFit fit_gaussian2d(const std::vector<double>& image, std::size_t width,
                                 std::size_t height, const RoiRect& roi) {
    if (image.size() != width * height)
        throw std::invalid_argument("fit_gaussian2d: image size does not match dimensions");
    if (roi.width < 5 || roi.height < 5)
        throw std::invalid_argument("fit_gaussian2d: ROI must be at least 5x5");
    if (roi.x0 + roi.width > width || roi.y0 + roi.height > height)
        throw std::invalid_argument("fit_gaussian2d: ROI outside the image");

    const std::size_t n = roi.width * roi.height;
    std::vector<double> data(n);
    for (std::size_t y = 0; y < roi.height; ++y)
        for (std::size_t x = 0; x < roi.width; ++x)
            data[y * roi.width + x] = image[(roi.y0 + y) * width + (roi.x0 + x)];

    // start values: border median as background, then centroid and width from
    // the half-max region only. Using all above-background pixels instead
    // would let clipped noise across the ROI inflate the width estimate and
    // occasionally steer the optimizer into the flat wide-Gaussian basin.
    std::vector<double> border;
    for (std::size_t x = 0; x < roi.width; ++x) {
        border.push_back(data[x]);
        border.push_back(data[(roi.height - 1) * roi.width + x]);
    }
    for (std::size_t y = 1; y + 1 < roi.height; ++y) {
        border.push_back(data[y * roi.width]);
        border.push_back(data[y * roi.width + roi.width - 1]);
    }
    std::nth_element(border.begin(), border.begin() + static_cast<long>(border.size() / 2),
                     border.end());
    double b0 = border[border.size() / 2];

    double peak = data[0];
    std::size_t peak_idx = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (data[i] > peak) {
            peak = data[i];
            peak_idx = i;
        }
    double a0 = std::max(peak - b0, 1e-12);

    double cx = 0.0, cy = 0.0, mass = 0.0;
    std::size_t n_half = 0;
    for (std::size_t y = 0; y < roi.height; ++y)
        for (std::size_t x = 0; x < roi.width; ++x) {
            double v = data[y * roi.width + x] - b0;
            if (v <= 0.5 * a0) continue;
            ++n_half;
            cx += v * static_cast<double>(x);
            cy += v * static_cast<double>(y);
            mass += v;
        }
    if (mass > 0.0) {
        cx /= mass;
        cy /= mass;
    } else {
        cx = static_cast<double>(peak_idx % roi.width);
        cy = static_cast<double>(peak_idx / roi.width);
    }
    // area inside the half-max contour of a Gaussian is 2 pi ln2 sigma^2
    double s0 = std::sqrt(static_cast<double>(n_half) / (2.0 * 3.14159265358979 * 0.693147));
    s0 = std::clamp(s0, 0.7, static_cast<double>(std::min(roi.width, roi.height)));

    auto model_terms = [&](const Eigen::VectorXd& p, std::size_t i, double& g, double& dx,
                           double& dy) {
        auto x = static_cast<double>(i % roi.width);
        auto y = static_cast<double>(i / roi.width);
        dx = x - p(1);
        dy = y - p(2);
        double s2 = p(3) * p(3);
        g = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
    };
    auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double g, dx, dy;
            model_terms(p, i, g, dx, dy);
            r(static_cast<Eigen::Index>(i)) = p(0) * g + p(4) - data[i];
        }
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(n, 5);
        for (std::size_t i = 0; i < n; ++i) {
            double g, dx, dy;
            model_terms(p, i, g, dx, dy);
            auto row = static_cast<Eigen::Index>(i);
            double s = p(3);
            j(row, 0) = g;
            j(row, 1) = p(0) * g * dx / (s * s);
            j(row, 2) = p(0) * g * dy / (s * s);
            j(row, 3) = p(0) * g * (dx * dx + dy * dy) / (s * s * s);
            j(row, 4) = 1.0;
        }
        return j;
    };

    Eigen::VectorXd init(5);
    init << a0, cx, cy, s0, b0;
    LevMarResult lm = levmar_fit(residual, jacobian, init);
    if (!lm.converged) throw std::runtime_error("fit_gaussian2d: fit did not converge");

    // a solution that left the ROI or degenerated into a near-constant sheet
    // is a failed fit even when the optimizer reports a minimum
    double margin = 1.0;
    double sig = std::abs(lm.params(3));
    if (!lm.params.allFinite() || lm.params(1) < -margin ||
        lm.params(1) > static_cast<double>(roi.width - 1) + margin || lm.params(2) < -margin ||
        lm.params(2) > static_cast<double>(roi.height - 1) + margin || sig < 0.05 ||
        sig > 2.0 * static_cast<double>(std::max(roi.width, roi.height)))
        throw std::runtime_error("fit_gaussian2d: fit did not converge");

    // the initializer seeds at the ROI maximum, and the expected maximum of a
    // few hundred unit-variance noise pixels is already about 3 sigma, so the
    // significance cut has to sit well above that. The floor term keeps an
    // exactly flat ROI (amplitude and error both collapse to rounding dust)
    // from slipping through.
    double amp_err = std::sqrt(std::max(lm.covariance(0, 0), 0.0));
    double amp_floor = 1e-9 * std::max(std::abs(lm.params(4)), 1.0);
    if (!(lm.params(0) > std::max(5.0 * amp_err, amp_floor)))
        throw std::runtime_error("fit_gaussian2d: no significant peak in the ROI");

    Gauss2dFit fit;
    fit.amplitude = lm.params(0);
    fit.x0 = lm.params(1) + static_cast<double>(roi.x0);
    fit.y0 = lm.params(2) + static_cast<double>(roi.y0);
    fit.sigma = std::abs(lm.params(3));
    fit.offset = lm.params(4);
    fit.covariance = lm.covariance;
    fit.chi2 = lm.chi2;
    fit.iterations = lm.iterations;
    return fit;
}

} // namespace nvmx
