#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hfid/regressors.hpp"

namespace hfid {

void RegressorSpec::validate() const {
    if (n_estimators < 1) throw std::invalid_argument("regressor: n_estimators must be >= 1");
    if (min_samples_leaf < 1) throw std::invalid_argument("regressor: min_samples_leaf must be >= 1");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0)) {
        throw std::invalid_argument("regressor: feature_subsample must lie in (0, 1]");
    }
}

namespace {

std::mt19937_64 member_rng(std::uint64_t seed, std::size_t member) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(member), 0x5eedu};
    return std::mt19937_64(seq);
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

TrainedModel train_forest(const RegressorSpec& spec, const Dataset& d) {
    TrainedModel model{spec, d.feature_names(), {}, {}};
    const std::vector<double> unit(d.rows(), 1.0);
    TreeParams params{spec.max_depth, spec.min_samples_leaf, spec.feature_subsample};
    model.trees.reserve(spec.n_estimators);
    for (std::size_t t = 0; t < spec.n_estimators; ++t) {
        auto rng = member_rng(spec.seed, t);
        std::vector<std::size_t> rows;
        if (spec.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, d.rows() - 1);
            rows.resize(d.rows());
            for (auto& r : rows) r = pick(rng);
        } else {
            rows = all_rows(d.rows());
        }
        model.trees.push_back(fit_tree(d.values(), d.target(), unit, rows, params, rng));
    }
    return model;
}

// AdaBoost.R2 (Drucker 1997) with weighted base trees instead of weighted resampling.
TrainedModel train_adaboost(const RegressorSpec& spec, const Dataset& d, BoostTrace* trace) {
    TrainedModel model{spec, d.feature_names(), {}, {}};
    const std::size_t n = d.rows();
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    const auto rows = all_rows(n);
    TreeParams params{spec.max_depth.value_or(kAdaBoostDefaultDepth), spec.min_samples_leaf, 1.0};
    std::vector<double> loss(n);

    for (std::size_t round = 0; round < spec.n_estimators; ++round) {
        auto rng = member_rng(spec.seed, round);
        RegressionTree tree = fit_tree(d.values(), d.target(), weights, rows, params, rng);

        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            loss[i] = std::abs(tree.predict(d.values().row(i)) - d.target()[i]);
            max_err = std::max(max_err, loss[i]);
        }
        if (max_err > 0.0) {
            for (auto& l : loss) {
                l /= max_err;
                if (spec.loss_shape == LossShape::Square) l = l * l;
                if (spec.loss_shape == LossShape::Exponential) l = 1.0 - std::exp(-l);
            }
        }
        double avg_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) avg_loss += weights[i] * loss[i];

        if (max_err <= 0.0 || avg_loss <= 0.0) {
            // Perfect fit: this estimator alone decides.
            model.trees.push_back(std::move(tree));
            model.estimator_weights.push_back(1.0);
            if (trace) {
                trace->sample_weight_sums.push_back(std::accumulate(weights.begin(), weights.end(), 0.0));
                trace->average_losses.push_back(avg_loss);
            }
            break;
        }
        if (avg_loss >= 0.5) {
            if (model.trees.empty()) {
                model.trees.push_back(std::move(tree));
                model.estimator_weights.push_back(1.0);
            }
            break;
        }
        const double beta = avg_loss / (1.0 - avg_loss);
        model.trees.push_back(std::move(tree));
        model.estimator_weights.push_back(std::log(1.0 / beta));

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] *= std::pow(beta, 1.0 - loss[i]);
            total += weights[i];
        }
        for (auto& w : weights) w /= total;
        if (trace) {
            trace->sample_weight_sums.push_back(std::accumulate(weights.begin(), weights.end(), 0.0));
            trace->average_losses.push_back(avg_loss);
        }
    }
    return model;
}

double weighted_median(std::vector<std::pair<double, double>>& preds) {
    std::sort(preds.begin(), preds.end());
    double total = 0.0;
    for (auto& p : preds) total += p.second;
    double cum = 0.0;
    for (auto& p : preds) {
        cum += p.second;
        if (cum >= 0.5 * total) return p.first;
    }
    return preds.back().first;
}

}  // namespace

TrainedModel train(const RegressorSpec& spec, const Dataset& train_data, BoostTrace* trace) {
    spec.validate();
    if (train_data.rows() == 0) throw std::invalid_argument("train: empty dataset");
    if (train_data.feature_count() == 0) throw std::invalid_argument("train: dataset has no features");
    switch (spec.kind) {
        case RegressorKind::DecisionTree: {
            TrainedModel model{spec, train_data.feature_names(), {}, {}};
            const std::vector<double> unit(train_data.rows(), 1.0);
            TreeParams params{spec.max_depth, spec.min_samples_leaf, 1.0};
            auto rng = member_rng(spec.seed, 0);
            model.trees.push_back(
                fit_tree(train_data.values(), train_data.target(), unit, all_rows(train_data.rows()), params, rng));
            return model;
        }
        case RegressorKind::RandomForest:
            return train_forest(spec, train_data);
        case RegressorKind::AdaBoost:
            return train_adaboost(spec, train_data, trace);
    }
    throw std::logic_error("train: unknown regressor kind");
}

double predict_one(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.feature_names.size()) {
        throw std::invalid_argument("predict: expected " + std::to_string(model.feature_names.size()) +
                                    " columns, got " + std::to_string(x.size()));
    }
    switch (model.spec.kind) {
        case RegressorKind::DecisionTree:
            return model.trees.front().predict(x);
        case RegressorKind::RandomForest: {
            double sum = 0.0;
            for (const auto& t : model.trees) sum += t.predict(x);
            return sum / static_cast<double>(model.trees.size());
        }
        case RegressorKind::AdaBoost: {
            std::vector<std::pair<double, double>> preds;
            preds.reserve(model.trees.size());
            for (std::size_t i = 0; i < model.trees.size(); ++i) {
                preds.emplace_back(model.trees[i].predict(x), model.estimator_weights[i]);
            }
            return weighted_median(preds);
        }
    }
    throw std::logic_error("predict: unknown regressor kind");
}

std::vector<double> predict(const TrainedModel& model, const Matrix& rows) {
    if (rows.cols() != model.feature_names.size()) {
        throw std::invalid_argument("predict: expected " + std::to_string(model.feature_names.size()) +
                                    " columns, got " + std::to_string(rows.cols()));
    }
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = predict_one(model, rows.row(r));
    return out;
}

std::vector<double> predict(const TrainedModel& model, const Dataset& data) {
    if (data.feature_names() != model.feature_names) {
        throw std::invalid_argument("predict: dataset columns do not match the model's training columns");
    }
    return predict(model, data.values());
}

std::string to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::DecisionTree: return "decision_tree";
        case RegressorKind::RandomForest: return "random_forest";
        case RegressorKind::AdaBoost: return "adaboost";
    }
    return "unknown";
}

RegressorKind regressor_kind_from_string(const std::string& s) {
    if (s == "decision_tree") return RegressorKind::DecisionTree;
    if (s == "random_forest") return RegressorKind::RandomForest;
    if (s == "adaboost") return RegressorKind::AdaBoost;
    throw std::invalid_argument("unknown regressor kind '" + s + "'");
}

std::string to_string(LossShape shape) {
    switch (shape) {
        case LossShape::Linear: return "linear";
        case LossShape::Square: return "square";
        case LossShape::Exponential: return "exponential";
    }
    return "unknown";
}

LossShape loss_shape_from_string(const std::string& s) {
    if (s == "linear") return LossShape::Linear;
    if (s == "square") return LossShape::Square;
    if (s == "exponential") return LossShape::Exponential;
    throw std::invalid_argument("unknown loss shape '" + s + "'");
}

}  // namespace hfid
