#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hfid/lime.hpp"

namespace hfid {

double LimeConfig::resolved_kernel_width(std::size_t feature_count) const {
    return kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(feature_count)));
}

void LimeConfig::validate() const {
    if (n_perturbations < 2) throw std::invalid_argument("lime: n_perturbations must be >= 2");
    if (kernel_width && !(*kernel_width > 0.0)) throw std::invalid_argument("lime: kernel_width must be > 0");
    if (!(lasso_lambda >= 0.0)) throw std::invalid_argument("lime: lasso_lambda must be >= 0");
}

FeatureStats compute_feature_stats(const Dataset& train) {
    if (train.rows() == 0) throw std::invalid_argument("feature stats: empty dataset");
    const std::size_t d = train.feature_count();
    FeatureStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    const double n = static_cast<double>(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += train.values()(r, j);
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < train.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = train.values()(r, j) - s.mean[j];
            s.std[j] += dv * dv;
        }
    }
    for (auto& v : s.std) {
        v = std::sqrt(v / n);
        if (!(v > 0.0)) v = 1.0;
    }
    return s;
}

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint32_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), salt};
    return std::mt19937_64(seq);
}

constexpr std::uint32_t kPerturbSalt = 0x11e;
constexpr std::uint32_t kPickSalt = 0x91c;

}  // namespace

Perturbation perturb(std::span<const double> x, const FeatureStats& stats, const LimeConfig& cfg,
                     std::uint64_t stream) {
    cfg.validate();
    const std::size_t d = x.size();
    if (stats.mean.size() != d || stats.std.size() != d) {
        throw std::invalid_argument("perturb: statistics do not match the instance width");
    }
    const std::size_t n = cfg.n_perturbations;
    Perturbation p{Matrix(n, d), Matrix(n, d), std::vector<double>(n, 0.0)};
    auto rng = stream_rng(cfg.seed, stream, kPerturbSalt);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (std::size_t j = 0; j < d; ++j) {
        p.samples(0, j) = x[j];
        p.standardized(0, j) = (x[j] - stats.mean[j]) / stats.std[j];
    }
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) {
            const double z = normal(rng);
            p.standardized(r, j) = z;
            p.samples(r, j) = z * stats.std[j] + stats.mean[j];
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        double ss = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = p.standardized(r, j) - p.standardized(0, j);
            ss += diff * diff;
        }
        p.distances[r] = std::sqrt(ss);
    }
    p.distances[0] = 0.0;
    return p;
}

double kernel_weight(double distance, double width) { return std::exp(-(distance * distance) / (width * width)); }

Predictor as_predictor(const TrainedModel& model) {
    return [&model](const Matrix& rows) { return predict(model, rows); };
}

LocalExplanation explain_local(const Predictor& model, std::span<const double> x, const FeatureStats& stats,
                               const LimeConfig& cfg, std::size_t instance) {
    const Perturbation p = perturb(x, stats, cfg, instance);
    const std::vector<double> target = model(p.samples);
    if (target.size() != p.samples.rows()) throw std::invalid_argument("explain_local: predictor returned wrong length");
    const double width = cfg.resolved_kernel_width(x.size());
    std::vector<double> weights(p.distances.size());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = kernel_weight(p.distances[i], width);

    LassoFit fit = weighted_lasso(p.standardized, target, weights, cfg.lasso_lambda);

    double sw = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        sw += weights[i];
        mean += weights[i] * target[i];
    }
    mean /= sw;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        double pred = fit.intercept;
        for (std::size_t j = 0; j < x.size(); ++j) pred += fit.coefficients[j] * p.standardized(i, j);
        ss_res += weights[i] * (target[i] - pred) * (target[i] - pred);
        ss_tot += weights[i] * (target[i] - mean) * (target[i] - mean);
    }
    const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return {instance, std::move(fit.coefficients), fit.intercept, r2};
}

LocalExplanation explain_local(const TrainedModel& model, std::span<const double> x, const FeatureStats& stats,
                               const LimeConfig& cfg, std::size_t instance) {
    if (x.size() != model.feature_names.size()) {
        throw std::invalid_argument("explain_local: instance width does not match the model");
    }
    return explain_local(as_predictor(model), x, stats, cfg, instance);
}

LocalExplanation explain_local(const TrainedModel& model, std::span<const double> x, const Dataset& train,
                               const LimeConfig& cfg, std::size_t instance) {
    return explain_local(model, x, compute_feature_stats(train), cfg, instance);
}

namespace {

std::vector<double> feature_importance(const std::vector<LocalExplanation>& explanations) {
    std::vector<double> importance(explanations.front().coefficients.size(), 0.0);
    for (const auto& e : explanations) {
        for (std::size_t j = 0; j < importance.size(); ++j) importance[j] += std::abs(e.coefficients[j]);
    }
    for (auto& v : importance) v = std::sqrt(v);
    return importance;
}

}  // namespace

double pick_coverage(const std::vector<LocalExplanation>& explanations, const std::vector<std::size_t>& positions) {
    if (explanations.empty()) return 0.0;
    const auto importance = feature_importance(explanations);
    double total = 0.0;
    for (std::size_t j = 0; j < importance.size(); ++j) {
        for (auto pos : positions) {
            if (std::abs(explanations[pos].coefficients[j]) > 0.0) {
                total += importance[j];
                break;
            }
        }
    }
    return total;
}

std::vector<std::size_t> submodular_pick(const std::vector<LocalExplanation>& explanations, std::size_t budget) {
    if (explanations.empty()) throw std::invalid_argument("submodular_pick: no explanations");
    if (budget == 0) throw std::invalid_argument("submodular_pick: budget must be positive");
    if (budget > explanations.size()) throw std::invalid_argument("submodular_pick: budget exceeds explanation count");
    const std::size_t d = explanations.front().coefficients.size();
    const auto importance = feature_importance(explanations);

    std::vector<bool> covered(d, false);
    std::vector<bool> taken(explanations.size(), false);
    std::vector<std::size_t> picked;
    while (picked.size() < budget) {
        std::size_t best = explanations.size();
        double best_gain = -1.0;
        for (std::size_t e = 0; e < explanations.size(); ++e) {
            if (taken[e]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (!covered[j] && std::abs(explanations[e].coefficients[j]) > 0.0) gain += importance[j];
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = e;
            }
        }
        taken[best] = true;
        for (std::size_t j = 0; j < d; ++j) {
            if (std::abs(explanations[best].coefficients[j]) > 0.0) covered[j] = true;
        }
        picked.push_back(explanations[best].instance);
    }
    return picked;
}

std::vector<std::string> GlobalRanking::least_important(std::size_t count) const {
    if (count > entries.size()) throw std::invalid_argument("ranking: requested more features than ranked");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) names.push_back(entries[i].feature);
    return names;
}

GlobalRanking global_ranking(const TrainedModel& model, const Dataset& data, const LimeConfig& lime_cfg,
                             const PickConfig& pick_cfg) {
    if (data.feature_names() != model.feature_names) {
        throw std::invalid_argument("global_ranking: dataset columns do not match the model");
    }
    return global_ranking(as_predictor(model), data, lime_cfg, pick_cfg);
}

GlobalRanking global_ranking(const Predictor& model, const Dataset& data, const LimeConfig& lime_cfg,
                             const PickConfig& pick_cfg) {
    lime_cfg.validate();
    if (pick_cfg.budget == 0) throw std::invalid_argument("global_ranking: budget must be positive");
    if (pick_cfg.budget > data.rows()) {
        throw std::invalid_argument("global_ranking: budget " + std::to_string(pick_cfg.budget) +
                                    " exceeds row count " + std::to_string(data.rows()));
    }
    const FeatureStats stats = compute_feature_stats(data);

    std::size_t draws = pick_cfg.budget;
    if (pick_cfg.method == PickMethod::GreedySubmodular) {
        draws = std::min(data.rows(), pick_cfg.candidate_pool.value_or(2 * pick_cfg.budget));
        if (draws < pick_cfg.budget) throw std::invalid_argument("global_ranking: candidate pool smaller than budget");
    }
    // Uniform sample without replacement via a partial Fisher-Yates shuffle.
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = stream_rng(lime_cfg.seed, 0, kPickSalt);
    for (std::size_t i = 0; i < draws; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    order.resize(draws);

    std::vector<LocalExplanation> explanations;
    explanations.reserve(draws);
    for (auto row : order) explanations.push_back(explain_local(model, data.values().row(row), stats, lime_cfg, row));

    std::vector<std::size_t> picked = order;
    if (pick_cfg.method == PickMethod::GreedySubmodular) picked = submodular_pick(explanations, pick_cfg.budget);

    const std::size_t d = data.feature_count();
    std::vector<double> weight(d, 0.0);
    for (const auto& e : explanations) {
        if (std::find(picked.begin(), picked.end(), e.instance) == picked.end()) continue;
        for (std::size_t j = 0; j < d; ++j) weight[j] += std::abs(e.coefficients[j]);
    }
    if (lime_cfg.aggregation == Aggregation::Mean) {
        for (auto& w : weight) w /= static_cast<double>(picked.size());
    }

    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return weight[a] < weight[b]; });
    GlobalRanking ranking;
    for (auto j : idx) ranking.entries.push_back({data.features()[j].name, weight[j]});
    ranking.picked_instances = std::move(picked);
    return ranking;
}

std::string to_string(PickMethod m) { return m == PickMethod::Sampling ? "sampling" : "greedy_submodular"; }

PickMethod pick_method_from_string(const std::string& s) {
    if (s == "sampling") return PickMethod::Sampling;
    if (s == "greedy_submodular") return PickMethod::GreedySubmodular;
    throw std::invalid_argument("unknown pick method '" + s + "'");
}

std::string to_string(Aggregation a) { return a == Aggregation::Sum ? "sum" : "mean"; }

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "sum") return Aggregation::Sum;
    if (s == "mean") return Aggregation::Mean;
    throw std::invalid_argument("unknown aggregation '" + s + "'");
}

}  // namespace hfid
