#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hfid/lime.hpp"

namespace hfid {

namespace {

struct Centered {
    Matrix x;
    std::vector<double> y;
    std::vector<double> x_mean;
    double y_mean = 0.0;
};

void check_inputs(const Matrix& x, std::span<const double> y, std::span<const double> w, double lambda) {
    if (x.rows() != y.size() || x.rows() != w.size()) {
        throw std::invalid_argument("weighted_lasso: X, y and weights disagree on row count");
    }
    if (lambda < 0.0 || !std::isfinite(lambda)) throw std::invalid_argument("weighted_lasso: lambda must be >= 0");
    double total = 0.0;
    for (double v : w) {
        if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("weighted_lasso: weights must be >= 0");
        total += v;
    }
    if (total <= 0.0) throw std::invalid_argument("weighted_lasso: all sample weights are zero");
}

Centered center(const Matrix& x, std::span<const double> y, std::span<const double> w) {
    Centered c{x, std::vector<double>(y.begin(), y.end()), std::vector<double>(x.cols(), 0.0), 0.0};
    double sw = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        sw += w[i];
        c.y_mean += w[i] * y[i];
        for (std::size_t j = 0; j < x.cols(); ++j) c.x_mean[j] += w[i] * x(i, j);
    }
    c.y_mean /= sw;
    for (auto& m : c.x_mean) m /= sw;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        c.y[i] -= c.y_mean;
        for (std::size_t j = 0; j < x.cols(); ++j) c.x(i, j) -= c.x_mean[j];
    }
    return c;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

LassoFit weighted_lasso(const Matrix& x, std::span<const double> y, std::span<const double> weights, double lambda,
                        const LassoOptions& options) {
    check_inputs(x, y, weights, lambda);
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const Centered c = center(x, y, weights);

    std::vector<double> curvature(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) curvature[j] += weights[i] * c.x(i, j) * c.x(i, j);
    }

    LassoFit fit;
    fit.coefficients.assign(p, 0.0);
    std::vector<double> residual = c.y;
    auto& beta = fit.coefficients;

    for (fit.sweeps = 1; fit.sweeps <= options.max_sweeps; ++fit.sweeps) {
        double max_change = 0.0;
        double max_scaled_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (curvature[j] <= 0.0) continue;
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += weights[i] * c.x(i, j) * residual[i];
            rho += curvature[j] * beta[j];
            const double updated = soft_threshold(rho, 0.5 * lambda) / curvature[j];
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * c.x(i, j);
                beta[j] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
            max_scaled_change = std::max(max_scaled_change, curvature[j] * std::abs(delta));
        }
        if (max_change < options.tolerance && max_scaled_change < options.tolerance) {
            fit.converged = true;
            break;
        }
    }
    fit.sweeps = std::min(fit.sweeps, options.max_sweeps);

    fit.intercept = c.y_mean;
    for (std::size_t j = 0; j < p; ++j) fit.intercept -= c.x_mean[j] * beta[j];
    return fit;
}

double lasso_objective(const Matrix& x, std::span<const double> y, std::span<const double> weights, double lambda,
                       std::span<const double> coefficients, double intercept) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double pred = intercept;
        for (std::size_t j = 0; j < x.cols(); ++j) pred += x(i, j) * coefficients[j];
        loss += weights[i] * (y[i] - pred) * (y[i] - pred);
    }
    double l1 = 0.0;
    for (double b : coefficients) l1 += std::abs(b);
    return loss + lambda * l1;
}

double lasso_kkt_residual(const Matrix& x, std::span<const double> y, std::span<const double> weights, double lambda,
                          std::span<const double> coefficients) {
    check_inputs(x, y, weights, lambda);
    const Centered c = center(x, y, weights);
    std::vector<double> residual = c.y;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) residual[i] -= c.x(i, j) * coefficients[j];
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) g += weights[i] * c.x(i, j) * residual[i];
        g *= 2.0;
        const double violation = coefficients[j] == 0.0
                                     ? std::max(0.0, std::abs(g) - lambda)
                                     : std::abs(g - lambda * (coefficients[j] > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, violation);
    }
    return worst;
}

}  // namespace hfid
