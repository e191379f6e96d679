#include "hfid/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace hfid {

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& section) {
    if (!j.is_object()) throw ConfigError(section + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError(section + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(section + "." + key + ": wrong type");
    }
}

std::size_t read_positive(const json& j, const char* key, std::size_t fallback, const std::string& section) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ConfigError(section + "." + key + ": expected a positive integer");
    }
    return v.get<std::size_t>();
}

template <typename Fn>
auto wrap(const std::string& section, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(section + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(section + ": " + e.what());
    }
}

json ranking_entries(const GlobalRanking& r) {
    json arr = json::array();
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        arr.push_back({{"rank", i + 1}, {"feature", r.entries[i].feature}, {"weight", r.entries[i].weight}});
    }
    return arr;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

json to_json(const RegressorSpec& s) {
    return {{"kind", to_string(s.kind)},
            {"n_estimators", s.n_estimators},
            {"max_depth", s.max_depth ? json(*s.max_depth) : json(nullptr)},
            {"min_samples_leaf", s.min_samples_leaf},
            {"feature_subsample", s.feature_subsample},
            {"bootstrap", s.bootstrap},
            {"loss_shape", to_string(s.loss_shape)},
            {"seed", s.seed}};
}

json to_json(const LimeConfig& c) {
    return {{"n_perturbations", c.n_perturbations},
            {"kernel_width", c.kernel_width ? json(*c.kernel_width) : json(nullptr)},
            {"lasso_lambda", c.lasso_lambda},
            {"seed", c.seed},
            {"aggregation", to_string(c.aggregation)}};
}

json to_json(const PickConfig& c) {
    return {{"method", to_string(c.method)},
            {"budget", c.budget},
            {"candidate_pool", c.candidate_pool ? json(*c.candidate_pool) : json(nullptr)}};
}

json to_json(const MlpConfig& c) {
    return {{"hidden_sizes", c.hidden_sizes}, {"l1_lambda", c.l1_lambda}, {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},             {"batch_size", c.batch_size}, {"seed", c.seed}};
}

json to_json(const CutoffConfig& c) {
    return {{"mode", to_string(c.mode)}, {"k", c.k ? json(*c.k) : json(nullptr)}, {"max_candidates", c.max_candidates}};
}

json to_json(const ReconstructionConfig& c) {
    return {{"removal_fraction", c.removal_fraction},
            {"min_removed", c.min_removed},
            {"embed_all_interactions", c.embed_all_interactions},
            {"max_embedded", c.max_embedded},
            {"standardize_interactions", c.standardize_interactions}};
}

json to_json(const SelectionConfig& c) {
    return {{"k_prime", c.k_prime ? json(*c.k_prime) : json("auto")}, {"objective", to_string(c.objective)}};
}

json to_json(const PipelineConfig& c) {
    return {{"regressor", to_json(c.regressor)},
            {"lime", to_json(c.lime)},
            {"pick", to_json(c.pick)},
            {"mlp", to_json(c.mlp)},
            {"cutoff", to_json(c.cutoff)},
            {"reconstruction", to_json(c.reconstruction)},
            {"selection", to_json(c.selection)},
            {"split", {{"train_count", c.split.train_count}, {"seed", c.split.seed}}}};
}

json to_json(const GlobalRanking& r) {
    return {{"entries", ranking_entries(r)}, {"picked_instances", r.picked_instances}};
}

json to_json(const std::vector<InteractionCandidate>& interactions) {
    json arr = json::array();
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        arr.push_back({{"rank", i + 1},
                       {"features", interactions[i].names},
                       {"indices", interactions[i].features},
                       {"strength", interactions[i].strength}});
    }
    return arr;
}

json to_json(const PipelineReport& r) {
    json sweep = json::array();
    for (const auto& p : r.sweep) {
        sweep.push_back({{"t", p.t}, {"removed_features", p.removed_features}, {"r2", p.r2}, {"rmse", p.rmse}});
    }
    return {{"stage1_ranking", to_json(r.stage1_ranking)},
            {"interactions", to_json(r.interactions)},
            {"dataset_ii_spec",
             {{"removed", r.dataset_ii_spec.removed},
              {"interactions", r.dataset_ii_spec.interactions},
              {"standardize_interactions", r.dataset_ii_spec.standardize_interactions}}},
            {"stage2_ranking", to_json(r.stage2_ranking)},
            {"k_prime", r.k_prime},
            {"sweep", sweep},
            {"chosen_t", r.chosen_t},
            {"dataset_iii_spec", {{"removed", r.dataset_iii_removed}, {"features", r.dataset_iii_features}}},
            {"baseline_metrics", {{"r2", r.baseline.r2}, {"rmse", r.baseline.rmse}}},
            {"optimized_metrics", {{"r2", r.optimized.r2}, {"rmse", r.optimized.rmse}}},
            {"improvement_pct",
             {{"r2", number_or_null(r.improvement.r2_pct)}, {"rmse", number_or_null(r.improvement.rmse_pct)}}},
            {"feature_counts", {{"dataset_i", r.features_i}, {"dataset_ii", r.features_ii}, {"dataset_iii", r.features_iii}}},
            {"features_deleted", r.dataset_ii_spec.removed.size() + r.chosen_t}};
}

json model_summary(const TrainedModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes()) {
            if (n.feature < 0) {
                nodes.push_back({{"leaf", true}, {"value", n.value}, {"samples", n.samples}});
            } else {
                nodes.push_back({{"leaf", false},
                                 {"feature", m.feature_names[static_cast<std::size_t>(n.feature)]},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"value", n.value},
                                 {"samples", n.samples}});
            }
        }
        trees.push_back({{"nodes", nodes}});
    }
    return {{"spec", to_json(m.spec)},
            {"feature_names", m.feature_names},
            {"trees", trees},
            {"estimator_weights", m.estimator_weights}};
}

RegressorSpec regressor_spec_from_json(const json& j) {
    const std::string sec = "regressor";
    reject_unknown(j, {"kind", "n_estimators", "max_depth", "min_samples_leaf", "feature_subsample", "bootstrap",
                       "loss_shape", "seed"},
                   sec);
    return wrap(sec, [&] {
        RegressorSpec s;
        if (j.contains("kind")) s.kind = regressor_kind_from_string(j.at("kind").get<std::string>());
        s.n_estimators = read_positive(j, "n_estimators", s.n_estimators, sec);
        if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
            if (!j.at("max_depth").is_number_integer() || j.at("max_depth").get<long long>() < 0) {
                throw ConfigError(sec + ".max_depth: expected a non-negative integer or null");
            }
            s.max_depth = j.at("max_depth").get<std::size_t>();
        }
        s.min_samples_leaf = read_positive(j, "min_samples_leaf", s.min_samples_leaf, sec);
        read(j, "feature_subsample", s.feature_subsample, sec);
        read(j, "bootstrap", s.bootstrap, sec);
        if (j.contains("loss_shape")) s.loss_shape = loss_shape_from_string(j.at("loss_shape").get<std::string>());
        read(j, "seed", s.seed, sec);
        s.validate();
        return s;
    });
}

LimeConfig lime_config_from_json(const json& j) {
    const std::string sec = "lime";
    reject_unknown(j, {"n_perturbations", "kernel_width", "lasso_lambda", "seed", "aggregation"}, sec);
    return wrap(sec, [&] {
        LimeConfig c;
        c.n_perturbations = read_positive(j, "n_perturbations", c.n_perturbations, sec);
        if (j.contains("kernel_width") && !j.at("kernel_width").is_null()) {
            double w = 0.0;
            read(j, "kernel_width", w, sec);
            c.kernel_width = w;
        }
        read(j, "lasso_lambda", c.lasso_lambda, sec);
        read(j, "seed", c.seed, sec);
        if (j.contains("aggregation")) c.aggregation = aggregation_from_string(j.at("aggregation").get<std::string>());
        c.validate();
        return c;
    });
}

PickConfig pick_config_from_json(const json& j) {
    const std::string sec = "pick";
    reject_unknown(j, {"method", "budget", "candidate_pool"}, sec);
    return wrap(sec, [&] {
        PickConfig c;
        if (j.contains("method")) c.method = pick_method_from_string(j.at("method").get<std::string>());
        c.budget = read_positive(j, "budget", c.budget, sec);
        if (j.contains("candidate_pool") && !j.at("candidate_pool").is_null()) {
            c.candidate_pool = read_positive(j, "candidate_pool", 1, sec);
        }
        return c;
    });
}

MlpConfig mlp_config_from_json(const json& j) {
    const std::string sec = "mlp";
    reject_unknown(j, {"hidden_sizes", "l1_lambda", "learning_rate", "epochs", "batch_size", "seed"}, sec);
    return wrap(sec, [&] {
        MlpConfig c;
        read(j, "hidden_sizes", c.hidden_sizes, sec);
        read(j, "l1_lambda", c.l1_lambda, sec);
        read(j, "learning_rate", c.learning_rate, sec);
        if (j.contains("epochs")) {
            if (!j.at("epochs").is_number_integer() || j.at("epochs").get<long long>() < 0) {
                throw ConfigError(sec + ".epochs: expected a non-negative integer");
            }
            c.epochs = j.at("epochs").get<std::size_t>();
        }
        c.batch_size = read_positive(j, "batch_size", c.batch_size, sec);
        read(j, "seed", c.seed, sec);
        c.validate();
        return c;
    });
}

CutoffConfig cutoff_config_from_json(const json& j) {
    const std::string sec = "cutoff";
    reject_unknown(j, {"mode", "k", "max_candidates"}, sec);
    return wrap(sec, [&] {
        CutoffConfig c;
        if (j.contains("mode")) c.mode = cutoff_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("k") && !j.at("k").is_null()) c.k = read_positive(j, "k", 1, sec);
        c.max_candidates = read_positive(j, "max_candidates", c.max_candidates, sec);
        c.validate();
        return c;
    });
}

ReconstructionConfig reconstruction_config_from_json(const json& j) {
    const std::string sec = "reconstruction";
    reject_unknown(j, {"removal_fraction", "min_removed", "embed_all_interactions", "max_embedded",
                       "standardize_interactions"},
                   sec);
    return wrap(sec, [&] {
        ReconstructionConfig c;
        read(j, "removal_fraction", c.removal_fraction, sec);
        read(j, "min_removed", c.min_removed, sec);
        read(j, "embed_all_interactions", c.embed_all_interactions, sec);
        read(j, "max_embedded", c.max_embedded, sec);
        read(j, "standardize_interactions", c.standardize_interactions, sec);
        c.validate();
        return c;
    });
}

SelectionConfig selection_config_from_json(const json& j) {
    const std::string sec = "selection";
    reject_unknown(j, {"k_prime", "objective"}, sec);
    return wrap(sec, [&] {
        SelectionConfig c;
        if (j.contains("k_prime")) {
            const auto& k = j.at("k_prime");
            if (k.is_string() && k.get<std::string>() == "auto") {
                c.k_prime.reset();
            } else if (k.is_number_integer() && k.get<long long>() >= 0) {
                c.k_prime = k.get<std::size_t>();
            } else {
                throw ConfigError(sec + ".k_prime: expected a non-negative integer or \"auto\"");
            }
        }
        if (j.contains("objective")) c.objective = objective_from_string(j.at("objective").get<std::string>());
        return c;
    });
}

synth::SyntheticSpec synthetic_spec_from_json(const json& j) {
    const std::string sec = "synthetic";
    reject_unknown(j, {"n_rows", "n_features", "terms", "noise_sigma", "distribution", "seed"}, sec);
    return wrap(sec, [&] {
        synth::SyntheticSpec s;
        s.n_rows = read_positive(j, "n_rows", s.n_rows, sec);
        s.n_features = read_positive(j, "n_features", s.n_features, sec);
        if (!j.contains("terms") || !j.at("terms").is_array()) throw ConfigError(sec + ".terms: required array");
        for (const auto& t : j.at("terms")) {
            reject_unknown(t, {"coefficient", "features"}, sec + ".terms[]");
            synth::Term term;
            read(t, "coefficient", term.coefficient, sec);
            // 1-based feature numbers, matching the x1..xd column names.
            std::vector<std::size_t> one_based;
            read(t, "features", one_based, sec);
            for (auto f : one_based) {
                if (f == 0) throw ConfigError(sec + ".terms[].features: feature numbers start at 1");
                term.features.push_back(f - 1);
            }
            s.terms.push_back(std::move(term));
        }
        read(j, "noise_sigma", s.noise_sigma, sec);
        if (j.contains("distribution")) {
            s.distribution = synth::feature_distribution_from_string(j.at("distribution").get<std::string>());
        }
        read(j, "seed", s.seed, sec);
        s.validate();
        return s;
    });
}

std::string ranking_csv(const GlobalRanking& ranking) {
    std::string out = "rank,feature,weight\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        out += std::to_string(i + 1) + "," + ranking.entries[i].feature + "," + format_number(ranking.entries[i].weight) +
               "\n";
    }
    return out;
}

std::string interactions_csv(const std::vector<InteractionCandidate>& interactions) {
    std::string out = "rank,feature_set,strength\n";
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        std::string set;
        for (std::size_t k = 0; k < interactions[i].names.size(); ++k) {
            if (k) set += ';';
            set += interactions[i].names[k];
        }
        out += std::to_string(i + 1) + "," + set + "," + format_number(interactions[i].strength) + "\n";
    }
    return out;
}

std::string sweep_csv(const std::vector<std::pair<std::size_t, std::vector<SweepPoint>>>& sweeps) {
    std::string out = "repetition,t,r2,rmse\n";
    for (const auto& [rep, points] : sweeps) {
        for (const auto& p : points) {
            out += std::to_string(rep) + "," + std::to_string(p.t) + "," + format_number(p.r2) + "," +
                   format_number(p.rmse) + "\n";
        }
    }
    return out;
}

}  // namespace hfid
