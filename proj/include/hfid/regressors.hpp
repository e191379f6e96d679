#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hfid/dataset.hpp"
#include "hfid/matrix.hpp"

namespace hfid {

enum class RegressorKind { DecisionTree, RandomForest, AdaBoost };
enum class LossShape { Linear, Square, Exponential };

struct RegressorSpec {
    RegressorKind kind = RegressorKind::RandomForest;
    std::size_t n_estimators = 100;
    /// Unset grows until leaves are pure or min_samples_leaf binds. AdaBoost falls back to 4.
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_leaf = 1;
    double feature_subsample = 1.0 / 3.0;
    bool bootstrap = true;
    LossShape loss_shape = LossShape::Linear;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr std::size_t kAdaBoostDefaultDepth = 4;

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
    std::size_t samples = 0;
};

/// CART regression tree. Rows with x[feature] <= threshold go left.
class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    double predict(std::span<const double> x) const;
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeParams {
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_leaf = 1;
    /// Fraction of features examined at each split; 1.0 examines every feature.
    double feature_fraction = 1.0;
};

/// Fits a tree on `rows` (duplicates allowed) using per-row weights.
/// Splits maximise weighted SSE reduction; ties go to the lowest feature, then lowest threshold.
RegressionTree fit_tree(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                        const std::vector<std::size_t>& rows, const TreeParams& params,
                        std::mt19937_64& rng);

struct TrainedModel {
    RegressorSpec spec;
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;
    /// AdaBoost estimator weights; empty for the other kinds.
    std::vector<double> estimator_weights;
};

/// Per-round diagnostics of AdaBoost.R2 training.
struct BoostTrace {
    std::vector<double> sample_weight_sums;
    std::vector<double> average_losses;
};

TrainedModel train(const RegressorSpec& spec, const Dataset& train_data, BoostTrace* trace = nullptr);

std::vector<double> predict(const TrainedModel& model, const Matrix& rows);
/// Checks the column contract by name before predicting.
std::vector<double> predict(const TrainedModel& model, const Dataset& data);
double predict_one(const TrainedModel& model, std::span<const double> x);

struct PredictionMetrics {
    double r2 = 0.0;
    double rmse = 0.0;
    bool operator==(const PredictionMetrics&) const = default;
};

double r2_score(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

PredictionMetrics evaluate(const TrainedModel& model, const Dataset& test);

std::string to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(const std::string& s);
std::string to_string(LossShape shape);
LossShape loss_shape_from_string(const std::string& s);

}  // namespace hfid
