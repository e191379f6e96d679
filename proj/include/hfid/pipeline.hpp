#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfid/dataset.hpp"
#include "hfid/lime.hpp"
#include "hfid/nid.hpp"
#include "hfid/regressors.hpp"

namespace hfid {

struct ReconstructionConfig {
    double removal_fraction = 0.10;
    std::size_t min_removed = 1;
    bool embed_all_interactions = true;
    /// Interactions embedded when embed_all_interactions is off (top of the cut-off list).
    std::size_t max_embedded = 0;
    /// Standardize constituents before multiplying. Off multiplies raw values.
    bool standardize_interactions = false;

    void validate() const;
    std::size_t removal_count(std::size_t feature_count) const;
};

enum class Objective { R2, Rmse, Combined };

struct SelectionConfig {
    /// Unset resolves to floor(n / 2) for a dataset with n features.
    std::optional<std::size_t> k_prime;
    Objective objective = Objective::Combined;

    std::size_t resolve_k_prime(std::size_t feature_count) const;
};

struct SweepPoint {
    std::size_t t = 0;
    std::vector<std::string> removed_features;
    double r2 = 0.0;
    double rmse = 0.0;
    bool operator==(const SweepPoint&) const = default;
};

/// How dataset II is derived from dataset I.
struct ReconstructionSpec {
    std::vector<std::string> removed;
    std::vector<std::vector<std::string>> interactions;
    bool standardize_interactions = false;
    bool operator==(const ReconstructionSpec&) const = default;
};

/// Removes features and appends products of the original columns of `original`.
Dataset apply_reconstruction(const Dataset& original, const ReconstructionSpec& spec);

struct PipelineConfig {
    RegressorSpec regressor;
    LimeConfig lime;
    PickConfig pick;
    MlpConfig mlp;
    CutoffConfig cutoff;
    ReconstructionConfig reconstruction;
    SelectionConfig selection;
    SplitSpec split;
};

struct ReconstructionResult {
    Dataset dataset;
    GlobalRanking ranking;
    std::vector<InteractionCandidate> interactions;
    ReconstructionSpec spec;
};

/// Stage 1. Ranking and interaction detection both run on the train split of dataset I.
ReconstructionResult reconstruct(const Dataset& dataset_i, const RegressorSpec& spec, const LimeConfig& lime_cfg,
                                 const PickConfig& pick_cfg, const MlpConfig& mlp_cfg, const CutoffConfig& cut_cfg,
                                 const ReconstructionConfig& rc, const SplitSpec& split_spec);

struct SweepResult {
    GlobalRanking ranking;
    std::size_t k_prime = 0;
    std::vector<SweepPoint> points;
};

/// Stage 2. Point t removes the t least important features of one fixed ranking, then
/// retrains and scores on the same train/test split.
SweepResult selection_sweep(const Dataset& dataset_ii, const RegressorSpec& spec, const LimeConfig& lime_cfg,
                            const PickConfig& pick_cfg, const SelectionConfig& sc, const SplitSpec& split_spec);

/// Index of the chosen point. Ties go to the larger t.
std::size_t choose_optimum(const std::vector<SweepPoint>& sweep, Objective objective);

struct Improvement {
    double r2_pct = 0.0;
    double rmse_pct = 0.0;
};

struct PipelineReport {
    GlobalRanking stage1_ranking;
    std::vector<InteractionCandidate> interactions;
    ReconstructionSpec dataset_ii_spec;
    GlobalRanking stage2_ranking;
    std::size_t k_prime = 0;
    std::vector<SweepPoint> sweep;
    std::size_t chosen_t = 0;
    std::vector<std::string> dataset_iii_removed;
    std::vector<std::string> dataset_iii_features;
    PredictionMetrics baseline;
    PredictionMetrics optimized;
    Improvement improvement;
    std::size_t features_i = 0;
    std::size_t features_ii = 0;
    std::size_t features_iii = 0;
};

PipelineReport run(const Dataset& dataset_i, const PipelineConfig& cfg);

/// Rebuilds dataset III from dataset I and the specs recorded in a report.
Dataset rebuild_dataset_iii(const Dataset& dataset_i, const PipelineReport& report);

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

}  // namespace hfid
