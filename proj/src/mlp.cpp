#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hfid/nid.hpp"

namespace hfid {

void MlpConfig::validate() const {
    if (hidden_sizes.empty()) throw std::invalid_argument("mlp: at least one hidden layer is required");
    for (auto h : hidden_sizes) {
        if (h == 0) throw std::invalid_argument("mlp: hidden layer sizes must be positive");
    }
    if (!(l1_lambda >= 0.0)) throw std::invalid_argument("mlp: l1_lambda must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("mlp: learning_rate must be > 0");
    if (batch_size == 0) throw std::invalid_argument("mlp: batch_size must be positive");
}

void MlpWeights::validate() const {
    if (layers.empty()) throw std::invalid_argument("mlp weights: no hidden layers");
    if (biases.size() != layers.size()) throw std::invalid_argument("mlp weights: bias count mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (biases[k].size() != layers[k].rows()) throw std::invalid_argument("mlp weights: bias size mismatch");
        if (k > 0 && layers[k].cols() != layers[k - 1].rows()) {
            throw std::invalid_argument("mlp weights: layer " + std::to_string(k + 1) + " input width mismatch");
        }
    }
    if (output.size() != layers.back().rows()) throw std::invalid_argument("mlp weights: output size mismatch");
}

double MlpWeights::l1_norm() const {
    double s = 0.0;
    for (const auto& m : layers) {
        for (double v : m.data()) s += std::abs(v);
    }
    for (double v : output) s += std::abs(v);
    return s;
}

MlpWeights init_mlp(std::size_t inputs, const MlpConfig& cfg) {
    cfg.validate();
    if (inputs == 0) throw std::invalid_argument("mlp: no inputs");
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x1417u};
    std::mt19937_64 rng(seq);
    MlpWeights w;
    std::size_t fan_in = inputs;
    for (auto units : cfg.hidden_sizes) {
        std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        Matrix m(units, fan_in);
        for (auto& v : m.data()) v = he(rng);
        w.layers.push_back(std::move(m));
        w.biases.emplace_back(units, 0.0);
        fan_in = units;
    }
    std::normal_distribution<double> glorot(0.0, std::sqrt(1.0 / static_cast<double>(fan_in)));
    w.output.resize(fan_in);
    for (auto& v : w.output) v = glorot(rng);
    return w;
}

namespace {

// Activations per layer for one input; acts[0] is the input itself.
void forward(const MlpWeights& w, std::span<const double> x, std::vector<std::vector<double>>& acts) {
    acts.resize(w.layers.size() + 1);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
        const Matrix& m = w.layers[k];
        auto& out = acts[k + 1];
        out.resize(m.rows());
        for (std::size_t u = 0; u < m.rows(); ++u) {
            double s = w.biases[k][u];
            const auto row = m.row(u);
            const auto& in = acts[k];
            for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * in[c];
            out[u] = s > 0.0 ? s : 0.0;
        }
    }
}

double output_of(const MlpWeights& w, const std::vector<double>& last) {
    double s = w.output_bias;
    for (std::size_t u = 0; u < last.size(); ++u) s += w.output[u] * last[u];
    return s;
}

MlpWeights zeros_like(const MlpWeights& w) {
    MlpWeights g;
    for (const auto& m : w.layers) g.layers.emplace_back(m.rows(), m.cols(), 0.0);
    for (const auto& b : w.biases) g.biases.emplace_back(b.size(), 0.0);
    g.output.assign(w.output.size(), 0.0);
    return g;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Accumulates d(loss)/d(params) for one sample into g, scaled by `scale`.
void backward(const MlpWeights& w, const std::vector<std::vector<double>>& acts, double dloss, double scale,
              MlpWeights& g, std::vector<double>& delta, std::vector<double>& next) {
    const std::size_t L = w.layers.size();
    const auto& last = acts[L];
    const double d_out = dloss * scale;
    g.output_bias += d_out;
    delta.assign(last.size(), 0.0);
    for (std::size_t u = 0; u < last.size(); ++u) {
        g.output[u] += d_out * last[u];
        delta[u] = last[u] > 0.0 ? d_out * w.output[u] : 0.0;
    }
    for (std::size_t k = L; k-- > 0;) {
        const Matrix& m = w.layers[k];
        const auto& in = acts[k];
        Matrix& gm = g.layers[k];
        for (std::size_t u = 0; u < m.rows(); ++u) {
            if (delta[u] == 0.0) continue;
            g.biases[k][u] += delta[u];
            auto grow = gm.row(u);
            for (std::size_t c = 0; c < in.size(); ++c) grow[c] += delta[u] * in[c];
        }
        if (k == 0) break;
        next.assign(m.cols(), 0.0);
        for (std::size_t u = 0; u < m.rows(); ++u) {
            if (delta[u] == 0.0) continue;
            const auto row = m.row(u);
            for (std::size_t c = 0; c < row.size(); ++c) next[c] += delta[u] * row[c];
        }
        for (std::size_t c = 0; c < next.size(); ++c) {
            if (!(in[c] > 0.0)) next[c] = 0.0;
        }
        delta.swap(next);
    }
}

void add_l1_subgradient(const MlpWeights& w, double l1, MlpWeights& g) {
    if (l1 == 0.0) return;
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
        const auto& src = w.layers[k].data();
        auto& dst = g.layers[k].data();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] += l1 * sign(src[i]);
    }
    for (std::size_t i = 0; i < w.output.size(); ++i) g.output[i] += l1 * sign(w.output[i]);
}

}  // namespace

double mlp_forward(const MlpWeights& weights, std::span<const double> x) {
    if (x.size() != weights.input_count()) throw std::invalid_argument("mlp_forward: input width mismatch");
    std::vector<std::vector<double>> acts;
    forward(weights, x, acts);
    return output_of(weights, acts.back());
}

double mlp_objective(const MlpWeights& weights, const Matrix& x, std::span<const double> y, double l1,
                     MlpWeights* gradient) {
    weights.validate();
    if (x.rows() != y.size() || x.rows() == 0) throw std::invalid_argument("mlp_objective: bad batch shape");
    if (x.cols() != weights.input_count()) throw std::invalid_argument("mlp_objective: input width mismatch");
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    if (gradient) *gradient = zeros_like(weights);
    std::vector<std::vector<double>> acts;
    std::vector<double> delta, next;
    double mse = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        forward(weights, x.row(r), acts);
        const double resid = output_of(weights, acts.back()) - y[r];
        mse += resid * resid;
        if (gradient) backward(weights, acts, 2.0 * resid, inv_n, *gradient, delta, next);
    }
    if (gradient) add_l1_subgradient(weights, l1, *gradient);
    return mse * inv_n + l1 * weights.l1_norm();
}

MlpWeights train_mlp(const Dataset& train, const MlpConfig& cfg) {
    cfg.validate();
    if (train.rows() == 0) throw std::invalid_argument("train_mlp: empty dataset");
    const std::size_t n = train.rows();
    const std::size_t d = train.feature_count();

    // Standardize inputs and target.
    Matrix x = train.values();
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, j);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) ss += (x(r, j) - mean) * (x(r, j) - mean);
        double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 0.0)) sd = 1.0;
        for (std::size_t r = 0; r < n; ++r) x(r, j) = (x(r, j) - mean) / sd;
    }
    std::vector<double> y = train.target();
    {
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : y) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 0.0)) sd = 1.0;
        for (auto& v : y) v = (v - mean) / sd;
    }

    MlpWeights w = init_mlp(d, cfg);
    MlpWeights m1 = zeros_like(w), m2 = zeros_like(w), grad;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double b1t = 1.0, b2t = 1.0;

    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0xba7cu};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = std::min(cfg.batch_size, n);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            Matrix bx(stop - start, d);
            std::vector<double> by(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                auto src = x.row(order[i]);
                std::copy(src.begin(), src.end(), bx.row(i - start).begin());
                by[i - start] = y[order[i]];
            }
            const double loss = mlp_objective(w, bx, by, cfg.l1_lambda, &grad);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train_mlp: loss diverged at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(stop - start);
            b1t *= beta1;
            b2t *= beta2;
            const double lr = cfg.learning_rate;
            auto step = [&](double& p, double& g, double& a, double& b) {
                a = beta1 * a + (1.0 - beta1) * g;
                b = beta2 * b + (1.0 - beta2) * g * g;
                p -= lr * (a / (1.0 - b1t)) / (std::sqrt(b / (1.0 - b2t)) + eps);
            };
            // Walk the three same-shaped parameter sets in lockstep.
            for (std::size_t k = 0; k < w.layers.size(); ++k) {
                auto& p = w.layers[k].data();
                for (std::size_t i = 0; i < p.size(); ++i) {
                    step(p[i], grad.layers[k].data()[i], m1.layers[k].data()[i], m2.layers[k].data()[i]);
                }
                for (std::size_t i = 0; i < w.biases[k].size(); ++i) {
                    step(w.biases[k][i], grad.biases[k][i], m1.biases[k][i], m2.biases[k][i]);
                }
            }
            for (std::size_t i = 0; i < w.output.size(); ++i) step(w.output[i], grad.output[i], m1.output[i], m2.output[i]);
            step(w.output_bias, grad.output_bias, m1.output_bias, m2.output_bias);
        }
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train_mlp: loss diverged at epoch " + std::to_string(epoch));
        }
    }
    return w;
}

}  // namespace hfid
