#include "hfid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hfid {

void ReconstructionConfig::validate() const {
    if (!(removal_fraction >= 0.0 && removal_fraction < 0.5)) {
        throw std::invalid_argument("reconstruction: removal_fraction must lie in [0, 0.5)");
    }
}

std::size_t ReconstructionConfig::removal_count(std::size_t feature_count) const {
    const auto by_fraction = static_cast<std::size_t>(std::llround(removal_fraction * static_cast<double>(feature_count)));
    return std::max(min_removed, by_fraction);
}

std::size_t SelectionConfig::resolve_k_prime(std::size_t feature_count) const {
    const std::size_t k = k_prime.value_or(feature_count / 2);
    if (k >= feature_count) {
        throw std::invalid_argument("selection: k' = " + std::to_string(k) + " must be below the feature count " +
                                    std::to_string(feature_count));
    }
    return k;
}

Dataset apply_reconstruction(const Dataset& original, const ReconstructionSpec& spec) {
    Dataset out = remove_features(original, spec.removed);
    for (const auto& set : spec.interactions) {
        auto column = interaction_column(original, set, spec.standardize_interactions);
        out = append_column(out, {interaction_name(set), std::nullopt, set}, column);
    }
    return out;
}

ReconstructionResult reconstruct(const Dataset& dataset_i, const RegressorSpec& spec, const LimeConfig& lime_cfg,
                                 const PickConfig& pick_cfg, const MlpConfig& mlp_cfg, const CutoffConfig& cut_cfg,
                                 const ReconstructionConfig& rc, const SplitSpec& split_spec) {
    rc.validate();
    const std::size_t n = dataset_i.feature_count();
    if (n < 3) throw std::invalid_argument("reconstruct: dataset I needs at least 3 features");
    const std::size_t removed = rc.removal_count(n);
    if (n < removed + 2) {
        throw std::invalid_argument("reconstruct: removing " + std::to_string(removed) + " of " + std::to_string(n) +
                                    " features would leave fewer than 2");
    }
    const TrainTest parts = split(dataset_i, split_spec);
    const TrainedModel model = train(spec, parts.train);

    ReconstructionResult result;
    result.ranking = global_ranking(model, parts.train, lime_cfg, pick_cfg);
    result.interactions = detect_interactions(parts.train, mlp_cfg, cut_cfg);

    result.spec.removed = result.ranking.least_important(removed);
    result.spec.standardize_interactions = rc.standardize_interactions;
    const std::size_t embed =
        rc.embed_all_interactions ? result.interactions.size() : std::min(rc.max_embedded, result.interactions.size());
    for (std::size_t i = 0; i < embed; ++i) result.spec.interactions.push_back(result.interactions[i].names);
    result.dataset = apply_reconstruction(dataset_i, result.spec);
    return result;
}

SweepResult selection_sweep(const Dataset& dataset_ii, const RegressorSpec& spec, const LimeConfig& lime_cfg,
                            const PickConfig& pick_cfg, const SelectionConfig& sc, const SplitSpec& split_spec) {
    SweepResult result;
    result.k_prime = sc.resolve_k_prime(dataset_ii.feature_count());
    const auto [train_rows, test_rows] = split_indices(dataset_ii.rows(), split_spec);
    const Dataset train_ii = dataset_ii.select_rows(train_rows);
    const Dataset test_ii = dataset_ii.select_rows(test_rows);

    const TrainedModel model = train(spec, train_ii);
    result.ranking = global_ranking(model, train_ii, lime_cfg, pick_cfg);

    for (std::size_t t = 0; t <= result.k_prime; ++t) {
        SweepPoint point;
        point.t = t;
        point.removed_features = result.ranking.least_important(t);
        PredictionMetrics m;
        if (t == 0) {
            m = evaluate(model, test_ii);
        } else {
            const Dataset train_t = remove_features(train_ii, point.removed_features);
            const Dataset test_t = remove_features(test_ii, point.removed_features);
            m = evaluate(train(spec, train_t), test_t);
        }
        point.r2 = m.r2;
        point.rmse = m.rmse;
        result.points.push_back(std::move(point));
    }
    return result;
}

namespace {

std::vector<double> zscores(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    std::vector<double> z(v.size(), 0.0);
    if (sd > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
    }
    return z;
}

}  // namespace

std::size_t choose_optimum(const std::vector<SweepPoint>& sweep, Objective objective) {
    if (sweep.empty()) throw std::invalid_argument("choose_optimum: empty sweep");
    std::vector<double> score(sweep.size());
    switch (objective) {
        case Objective::R2:
            for (std::size_t i = 0; i < sweep.size(); ++i) score[i] = sweep[i].r2;
            break;
        case Objective::Rmse:
            for (std::size_t i = 0; i < sweep.size(); ++i) score[i] = -sweep[i].rmse;
            break;
        case Objective::Combined: {
            std::vector<double> r2(sweep.size()), err(sweep.size());
            for (std::size_t i = 0; i < sweep.size(); ++i) {
                r2[i] = sweep[i].r2;
                err[i] = sweep[i].rmse;
            }
            const auto zr = zscores(r2);
            const auto ze = zscores(err);
            for (std::size_t i = 0; i < sweep.size(); ++i) score[i] = zr[i] - ze[i];
            break;
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        if (score[i] > score[best] || (score[i] == score[best] && sweep[i].t > sweep[best].t)) best = i;
    }
    return best;
}

PipelineReport run(const Dataset& dataset_i, const PipelineConfig& cfg) {
    PipelineReport report;
    report.features_i = dataset_i.feature_count();

    const TrainTest parts = split(dataset_i, cfg.split);
    try {
        report.baseline = evaluate(train(cfg.regressor, parts.train), parts.test);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("baseline metrics undefined: ") + e.what());
    }

    ReconstructionResult stage1 = reconstruct(dataset_i, cfg.regressor, cfg.lime, cfg.pick, cfg.mlp, cfg.cutoff,
                                              cfg.reconstruction, cfg.split);
    report.stage1_ranking = std::move(stage1.ranking);
    report.interactions = std::move(stage1.interactions);
    report.dataset_ii_spec = std::move(stage1.spec);
    report.features_ii = stage1.dataset.feature_count();

    SweepResult stage2 = selection_sweep(stage1.dataset, cfg.regressor, cfg.lime, cfg.pick, cfg.selection, cfg.split);
    report.stage2_ranking = std::move(stage2.ranking);
    report.k_prime = stage2.k_prime;
    report.sweep = std::move(stage2.points);

    const SweepPoint& chosen = report.sweep[choose_optimum(report.sweep, cfg.selection.objective)];
    report.chosen_t = chosen.t;
    report.dataset_iii_removed = chosen.removed_features;
    report.dataset_iii_features = remove_features(stage1.dataset, chosen.removed_features).feature_names();
    report.features_iii = report.dataset_iii_features.size();
    report.optimized = {chosen.r2, chosen.rmse};

    report.improvement.r2_pct = (report.optimized.r2 - report.baseline.r2) / std::abs(report.baseline.r2) * 100.0;
    report.improvement.rmse_pct = (report.baseline.rmse - report.optimized.rmse) / report.baseline.rmse * 100.0;
    return report;
}

Dataset rebuild_dataset_iii(const Dataset& dataset_i, const PipelineReport& report) {
    return remove_features(apply_reconstruction(dataset_i, report.dataset_ii_spec), report.dataset_iii_removed);
}

std::string to_string(Objective o) {
    switch (o) {
        case Objective::R2: return "r2";
        case Objective::Rmse: return "rmse";
        case Objective::Combined: return "combined";
    }
    return "unknown";
}

Objective objective_from_string(const std::string& s) {
    if (s == "r2") return Objective::R2;
    if (s == "rmse") return Objective::Rmse;
    if (s == "combined") return Objective::Combined;
    throw std::invalid_argument("unknown objective '" + s + "'");
}

}  // namespace hfid
