#include "hfid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hfid::synth {

void SyntheticSpec::validate() const {
    if (n_rows == 0) throw std::invalid_argument("synthetic: n_rows must be positive");
    if (n_features == 0) throw std::invalid_argument("synthetic: n_features must be positive");
    if (terms.empty()) throw std::invalid_argument("synthetic: at least one term is required");
    for (const auto& t : terms) {
        if (t.features.empty()) throw std::invalid_argument("synthetic: term without features");
        for (auto f : t.features) {
            if (f >= n_features) throw std::invalid_argument("synthetic: term feature index out of range");
        }
    }
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synthetic: noise_sigma must be >= 0");
}

double evaluate_terms(const std::vector<Term>& terms, std::span<const double> x) {
    double y = 0.0;
    for (const auto& t : terms) {
        double prod = t.coefficient;
        for (auto f : t.features) prod *= x[f];
        y += prod;
    }
    return y;
}

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    Matrix x(spec.n_rows, spec.n_features);
    std::vector<double> y(spec.n_rows);
    for (std::size_t r = 0; r < spec.n_rows; ++r) {
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            x(r, j) = spec.distribution == FeatureDistribution::Uniform ? uniform(rng) : normal(rng);
        }
        y[r] = evaluate_terms(spec.terms, x.row(r));
        if (spec.noise_sigma > 0.0) y[r] += spec.noise_sigma * noise(rng);
    }
    std::vector<FeatureDescriptor> features;
    for (std::size_t j = 0; j < spec.n_features; ++j) features.push_back({"x" + std::to_string(j + 1), std::nullopt, {}});
    return {Dataset(std::move(features), std::move(x), "y", std::move(y)), spec.terms};
}

namespace {

// Weighted, centred quadratic form: objective(b) = c - 2 g.b + b.A.b + lambda |b|_1,
// with the intercept profiled out.
struct Quadratic {
    std::vector<std::vector<double>> a;
    std::vector<double> g;
    double c = 0.0;
    std::vector<double> x_mean;
    double y_mean = 0.0;

    double value(const std::vector<double>& b, double lambda) const {
        double v = c;
        for (std::size_t i = 0; i < b.size(); ++i) {
            v -= 2.0 * g[i] * b[i];
            for (std::size_t j = 0; j < b.size(); ++j) v += b[i] * a[i][j] * b[j];
            v += lambda * std::abs(b[i]);
        }
        return v;
    }
};

Quadratic build_quadratic(const Matrix& x, std::span<const double> y, std::span<const double> w) {
    const std::size_t n = x.rows(), p = x.cols();
    Quadratic q;
    q.a.assign(p, std::vector<double>(p, 0.0));
    q.g.assign(p, 0.0);
    q.x_mean.assign(p, 0.0);
    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        q.y_mean += w[i] * y[i];
        for (std::size_t j = 0; j < p; ++j) q.x_mean[j] += w[i] * x(i, j);
    }
    if (!(sw > 0.0)) throw std::invalid_argument("brute_force_lasso: all weights are zero");
    q.y_mean /= sw;
    for (auto& m : q.x_mean) m /= sw;
    for (std::size_t i = 0; i < n; ++i) {
        const double yc = y[i] - q.y_mean;
        q.c += w[i] * yc * yc;
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = x(i, j) - q.x_mean[j];
            q.g[j] += w[i] * xj * yc;
            for (std::size_t k = 0; k < p; ++k) q.a[j][k] += w[i] * xj * (x(i, k) - q.x_mean[k]);
        }
    }
    return q;
}

// Gaussian elimination with partial pivoting; returns zeros for a singular system.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t p = b.size();
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (std::abs(a[piv][col]) < 1e-14) return std::vector<double>(p, 0.0);
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < p; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> out(p);
    for (std::size_t r = p; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < p; ++k) s -= a[r][k] * out[k];
        out[r] = s / a[r][r];
    }
    return out;
}

// Evaluates every point of the tensor grid lo[j] + i * step[j], i in [0, resolution).
std::vector<double> grid_search(const Quadratic& q, double lambda, const std::vector<double>& lo,
                                const std::vector<double>& step, std::size_t resolution, double& best_value) {
    const std::size_t p = lo.size();
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> b(p), best(p);
    best_value = std::numeric_limits<double>::infinity();
    while (true) {
        for (std::size_t j = 0; j < p; ++j) b[j] = lo[j] + static_cast<double>(idx[j]) * step[j];
        const double v = q.value(b, lambda);
        if (v < best_value) {
            best_value = v;
            best = b;
        }
        std::size_t j = 0;
        while (j < p && ++idx[j] == resolution) idx[j++] = 0;
        if (j == p) break;
    }
    return best;
}

}  // namespace

BruteForceLasso brute_force_lasso(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                                  double lambda, std::size_t resolution) {
    const std::size_t p = x.cols();
    if (p == 0 || p > 3) throw std::invalid_argument("brute_force_lasso: supports 1 to 3 features");
    if (x.rows() != y.size() || x.rows() != weights.size()) throw std::invalid_argument("brute_force_lasso: shape");
    if (resolution < 3) throw std::invalid_argument("brute_force_lasso: resolution must be >= 3");
    const Quadratic q = build_quadratic(x, y, weights);
    const auto ols = solve(q.a, q.g);

    const double intervals = static_cast<double>(resolution - 1);
    std::vector<double> lo(p), step(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double half = 2.0 * std::abs(ols[j]) + 1.0;
        lo[j] = -half;
        step[j] = 2.0 * half / intervals;
    }
    double best_value = 0.0;
    auto coarse = grid_search(q, lambda, lo, step, resolution, best_value);

    std::vector<double> fine_lo(p), fine_step(p);
    for (std::size_t j = 0; j < p; ++j) {
        fine_lo[j] = coarse[j] - step[j];
        fine_step[j] = 2.0 * step[j] / intervals;
    }
    double fine_value = 0.0;
    auto fine = grid_search(q, lambda, fine_lo, fine_step, resolution, fine_value);

    BruteForceLasso out;
    out.coefficients = fine_value <= best_value ? fine : coarse;
    out.objective = std::min(fine_value, best_value);
    out.intercept = q.y_mean;
    for (std::size_t j = 0; j < p; ++j) out.intercept -= q.x_mean[j] * out.coefficients[j];
    return out;
}

std::vector<SubsetStrength> exhaustive_interaction_oracle(const MlpWeights& weights, std::size_t max_order) {
    weights.validate();
    const std::size_t d = weights.input_count();
    if (d > 12) throw std::invalid_argument("exhaustive oracle: at most 12 features");
    if (max_order < 2) throw std::invalid_argument("exhaustive oracle: max_order must be >= 2");

    // Path weights from each first-layer unit to each last-layer unit: |W(L)| ... |W(2)|.
    const Matrix& first = weights.layers.front();
    const std::size_t units = first.rows();
    Matrix path(units, units, 0.0);
    for (std::size_t i = 0; i < units; ++i) path(i, i) = 1.0;
    for (std::size_t k = 1; k < weights.layers.size(); ++k) {
        const Matrix& m = weights.layers[k];
        Matrix next(m.rows(), units, 0.0);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                const double a = std::abs(m(r, c));
                for (std::size_t i = 0; i < units; ++i) next(r, i) += a * path(c, i);
            }
        }
        path = std::move(next);
    }
    std::vector<double> influence(units, 0.0);
    for (std::size_t r = 0; r < path.rows(); ++r) {
        for (std::size_t i = 0; i < units; ++i) influence[i] += std::abs(weights.output[r]) * path(r, i);
    }

    std::vector<SubsetStrength> out;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
        if (size < 2 || size > max_order) continue;
        SubsetStrength s;
        for (std::size_t f = 0; f < d; ++f) {
            if (mask & (1u << f)) s.features.push_back(f);
        }
        for (std::size_t i = 0; i < units; ++i) {
            double m = std::numeric_limits<double>::infinity();
            for (auto f : s.features) m = std::min(m, std::abs(first(i, f)));
            s.strength += influence[i] * m;
        }
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SubsetStrength& a, const SubsetStrength& b) { return a.strength > b.strength; });
    return out;
}

std::string to_string(FeatureDistribution d) { return d == FeatureDistribution::Uniform ? "uniform" : "normal"; }

FeatureDistribution feature_distribution_from_string(const std::string& s) {
    if (s == "uniform") return FeatureDistribution::Uniform;
    if (s == "normal") return FeatureDistribution::Normal;
    throw std::invalid_argument("unknown feature distribution '" + s + "'");
}

}  // namespace hfid::synth
