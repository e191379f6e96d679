#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfid/dataset.hpp"
#include "hfid/matrix.hpp"
#include "hfid/regressors.hpp"

namespace hfid {

// ---------------------------------------------------------------------------
// Weighted lasso
// ---------------------------------------------------------------------------

struct LassoOptions {
    /// Stop once a full sweep moves no coefficient by more than this, both in raw
    /// units and scaled by the coordinate's curvature sum(w x^2).
    double tolerance = 1e-7;
    std::size_t max_sweeps = 10000;
};

struct LassoFit {
    std::vector<double> coefficients;
    double intercept = 0.0;
    std::size_t sweeps = 0;
    bool converged = false;
};

/// Minimises sum_i w_i (y_i - b0 - x_i.b)^2 + lambda * |b|_1 by cyclic coordinate
/// descent with soft-thresholding. The intercept is unpenalised.
LassoFit weighted_lasso(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                        double lambda, const LassoOptions& options = {});

/// Value of the weighted lasso objective at (coefficients, intercept).
double lasso_objective(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                       double lambda, std::span<const double> coefficients, double intercept);

/// Largest violation of the lasso subgradient optimality conditions on centred data.
double lasso_kkt_residual(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                          double lambda, std::span<const double> coefficients);

// ---------------------------------------------------------------------------
// Local explanations
// ---------------------------------------------------------------------------

enum class Aggregation { Sum, Mean };

struct LimeConfig {
    std::size_t n_perturbations = 5000;
    /// Unset means 0.75 * sqrt(feature count).
    std::optional<double> kernel_width;
    double lasso_lambda = 0.01;
    std::uint64_t seed = 0;
    Aggregation aggregation = Aggregation::Sum;

    double resolved_kernel_width(std::size_t feature_count) const;
    void validate() const;
};

/// Training-column means and standard deviations; zero deviations are clamped to 1.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> std;
};

FeatureStats compute_feature_stats(const Dataset& train);

struct Perturbation {
    Matrix samples;       // original units, row 0 is the explained instance
    Matrix standardized;  // (v - mean) / std
    std::vector<double> distances;
};

/// Draws n_perturbations rows from independent per-feature Gaussians with the training
/// mean/std. The RNG stream is derived from (cfg.seed, stream).
Perturbation perturb(std::span<const double> x, const FeatureStats& stats, const LimeConfig& cfg,
                     std::uint64_t stream);

/// exp(-distance^2 / width^2)
double kernel_weight(double distance, double width);

struct LocalExplanation {
    std::size_t instance = 0;
    std::vector<double> coefficients;  // standardized units
    double intercept = 0.0;
    double local_fit_r2 = 0.0;
};

/// Any black-box regressor: maps a batch of rows to predictions.
using Predictor = std::function<std::vector<double>(const Matrix&)>;

Predictor as_predictor(const TrainedModel& model);

LocalExplanation explain_local(const Predictor& model, std::span<const double> x, const FeatureStats& stats,
                               const LimeConfig& cfg, std::size_t instance);
LocalExplanation explain_local(const TrainedModel& model, std::span<const double> x, const FeatureStats& stats,
                               const LimeConfig& cfg, std::size_t instance);
LocalExplanation explain_local(const TrainedModel& model, std::span<const double> x, const Dataset& train,
                               const LimeConfig& cfg, std::size_t instance = 0);

// ---------------------------------------------------------------------------
// Global ranking
// ---------------------------------------------------------------------------

enum class PickMethod { GreedySubmodular, Sampling };

struct PickConfig {
    PickMethod method = PickMethod::Sampling;
    std::size_t budget = 1000;
    /// Instances explained before greedy picking; unset means min(rows, 2 * budget).
    std::optional<std::size_t> candidate_pool;
};

/// Greedy maximisation of the weighted feature coverage of the picked explanations.
/// Returns the `instance` fields of the chosen explanations in pick order.
std::vector<std::size_t> submodular_pick(const std::vector<LocalExplanation>& explanations, std::size_t budget);

/// Coverage of a set of explanations (by position), with importance sqrt(sum |coef|).
double pick_coverage(const std::vector<LocalExplanation>& explanations, const std::vector<std::size_t>& positions);

struct RankedFeature {
    std::string feature;
    double weight = 0.0;
    bool operator==(const RankedFeature&) const = default;
};

/// Ascending by weight: entry 0 is the least important feature.
struct GlobalRanking {
    std::vector<RankedFeature> entries;
    std::vector<std::size_t> picked_instances;

    std::vector<std::string> least_important(std::size_t count) const;
    bool operator==(const GlobalRanking&) const = default;
};

/// Sampling explains `budget` rows drawn without replacement; greedy_submodular explains a
/// candidate pool and keeps the submodular pick. Weight = sum (or mean) of |coefficient|.
GlobalRanking global_ranking(const Predictor& model, const Dataset& data, const LimeConfig& lime_cfg,
                             const PickConfig& pick_cfg);
GlobalRanking global_ranking(const TrainedModel& model, const Dataset& data, const LimeConfig& lime_cfg,
                             const PickConfig& pick_cfg);

std::string to_string(PickMethod m);
PickMethod pick_method_from_string(const std::string& s);
std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

}  // namespace hfid
