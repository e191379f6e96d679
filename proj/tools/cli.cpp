#include "cli.hpp"

#include <cmath>
#include <set>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace hfid::cli {

namespace fs = std::filesystem;

SplitSpec RunConfig::split_for(std::size_t rows) const {
    SplitSpec s;
    s.seed = pipeline.split.seed;
    if (train_count) {
        s.train_count = *train_count;
    } else {
        s.train_count = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows)));
    }
    if (s.train_count == 0 || s.train_count >= rows) {
        throw ConfigError("split: train size " + std::to_string(s.train_count) + " invalid for " +
                          std::to_string(rows) + " rows");
    }
    return s;
}

PipelineConfig RunConfig::pipeline_for(std::size_t repetition) const {
    PipelineConfig p = pipeline;
    p.regressor.seed += repetition;
    p.lime.seed += repetition;
    p.mlp.seed += repetition;
    p.split.seed += repetition;
    return p;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir, const Overrides& o) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    static const std::set<std::string> known = {"data",   "target", "split",          "regressor", "lime",
                                                "pick",   "mlp",    "cutoff",         "reconstruction",
                                                "selection", "out", "repetitions",    "synthetic"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "'");
    }
    RunConfig cfg;
    try {
        if (j.contains("data")) cfg.data = resolve(base_dir, j.at("data").get<std::string>());
        cfg.target = j.value("target", std::string("y"));
        if (j.contains("out")) cfg.out = resolve(base_dir, j.at("out").get<std::string>());
        if (j.contains("repetitions")) {
            const auto& r = j.at("repetitions");
            if (!r.is_number_integer() || r.get<long long>() <= 0) {
                throw ConfigError("repetitions: expected a positive integer");
            }
            cfg.repetitions = r.get<std::size_t>();
        }
        const json& sp = section(j, "split");
        for (auto it = sp.begin(); it != sp.end(); ++it) {
            if (it.key() != "train_count" && it.key() != "train_fraction" && it.key() != "seed") {
                throw ConfigError("split: unknown key '" + it.key() + "'");
            }
        }
        if (sp.contains("train_count")) {
            if (!sp.at("train_count").is_number_integer() || sp.at("train_count").get<long long>() <= 0) {
                throw ConfigError("split.train_count: expected a positive integer");
            }
            cfg.train_count = sp.at("train_count").get<std::size_t>();
        }
        if (sp.contains("train_fraction")) {
            cfg.train_fraction = sp.at("train_fraction").get<double>();
            if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
                throw ConfigError("split.train_fraction: must lie in (0, 1)");
            }
        }
        cfg.pipeline.split.seed = sp.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.pipeline.regressor = regressor_spec_from_json(section(j, "regressor"));
    cfg.pipeline.lime = lime_config_from_json(section(j, "lime"));
    cfg.pipeline.pick = pick_config_from_json(section(j, "pick"));
    cfg.pipeline.mlp = mlp_config_from_json(section(j, "mlp"));
    cfg.pipeline.cutoff = cutoff_config_from_json(section(j, "cutoff"));
    cfg.pipeline.reconstruction = reconstruction_config_from_json(section(j, "reconstruction"));
    cfg.pipeline.selection = selection_config_from_json(section(j, "selection"));
    if (j.contains("synthetic")) cfg.synthetic = synthetic_spec_from_json(j.at("synthetic"));

    if (o.data) cfg.data = *o.data;
    if (o.target) cfg.target = *o.target;
    if (o.out) cfg.out = *o.out;
    if (o.seed) {
        cfg.pipeline.split.seed = *o.seed;
        cfg.pipeline.regressor.seed = *o.seed;
        cfg.pipeline.lime.seed = *o.seed;
        cfg.pipeline.mlp.seed = *o.seed;
        if (cfg.synthetic) cfg.synthetic->seed = *o.seed;
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& config_path, const Overrides& overrides) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config '" + config_path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + config_path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j, config_path.parent_path(), overrides);
}

Dataset load_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ConfigError("config: no data path given");
    if (!fs::exists(cfg.data)) throw ConfigError("data file '" + cfg.data.string() + "' does not exist");
    return load_csv(cfg.data, cfg.target);
}

void cmd_importance(const RunConfig& cfg, bool export_model) {
    const Dataset data = load_data(cfg);
    const PipelineConfig p = cfg.pipeline_for(0);
    const TrainTest parts = split(data, cfg.split_for(data.rows()));
    const TrainedModel model = train(p.regressor, parts.train);
    const GlobalRanking ranking = global_ranking(model, parts.train, p.lime, p.pick);
    fs::create_directories(cfg.out);
    write_text(cfg.out / "importance.csv", ranking_csv(ranking));
    if (export_model) write_text(cfg.out / "model.json", model_summary(model).dump(2) + "\n");
}

void cmd_interactions(const RunConfig& cfg) {
    const Dataset data = load_data(cfg);
    const PipelineConfig p = cfg.pipeline_for(0);
    const TrainTest parts = split(data, cfg.split_for(data.rows()));
    const auto interactions = detect_interactions(parts.train, p.mlp, p.cutoff);
    fs::create_directories(cfg.out);
    write_text(cfg.out / "interactions.csv", interactions_csv(interactions));
}

namespace {

json mean_and_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    json out = {{"mean", std::isfinite(mean) ? json(mean) : json(nullptr)}, {"std", nullptr}};
    if (v.size() > 1 && std::isfinite(mean)) {
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out["std"] = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return out;
}

}  // namespace

json cmd_optimize(const RunConfig& cfg) {
    const Dataset data = load_data(cfg);
    json reps = json::array();
    std::vector<std::pair<std::size_t, std::vector<SweepPoint>>> sweeps;
    std::vector<double> r2_gain, rmse_gain, deleted;
    std::optional<PipelineReport> first;
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        PipelineConfig p = cfg.pipeline_for(r);
        p.split = cfg.split_for(data.rows());
        p.split.seed = cfg.pipeline.split.seed + r;
        PipelineReport report = run(data, p);
        reps.push_back({{"repetition", r}, {"config", to_json(p)}, {"report", to_json(report)}});
        sweeps.emplace_back(r, report.sweep);
        r2_gain.push_back(report.improvement.r2_pct);
        rmse_gain.push_back(report.improvement.rmse_pct);
        deleted.push_back(static_cast<double>(report.dataset_ii_spec.removed.size() + report.chosen_t));
        if (!first) first = std::move(report);
    }
    json doc = {{"format", "hfid-report/1"},
                {"data", cfg.data.filename().string()},
                {"target", cfg.target},
                {"rows", data.rows()},
                {"repetition_count", cfg.repetitions},
                {"repetitions", reps},
                {"summary",
                 {{"r2_improvement_pct", mean_and_std(r2_gain)},
                  {"rmse_improvement_pct", mean_and_std(rmse_gain)},
                  {"features_deleted", mean_and_std(deleted)}}}};

    fs::create_directories(cfg.out);
    write_text(cfg.out / "report.json", doc.dump(2) + "\n");
    write_text(cfg.out / "sweep.csv", sweep_csv(sweeps));
    write_text(cfg.out / "importance_stage1.csv", ranking_csv(first->stage1_ranking));
    write_text(cfg.out / "importance_stage2.csv", ranking_csv(first->stage2_ranking));
    write_text(cfg.out / "interactions.csv", interactions_csv(first->interactions));
    return doc;
}

void cmd_generate(const RunConfig& cfg) {
    if (!cfg.synthetic) throw ConfigError("generate: config has no 'synthetic' section");
    const auto generated = synth::generate(*cfg.synthetic);
    fs::create_directories(cfg.out);
    write_csv(generated.data, cfg.out / "data.csv");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid feature importance and interaction detection for tabular regression"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides overrides;
    bool export_model = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--data", overrides.data, "Input CSV (overrides config)");
        sub->add_option("--target", overrides.target, "Target column name (overrides config)");
        sub->add_option("--out", overrides.out, "Output directory (overrides config)");
        sub->add_option("--seed", overrides.seed, "Seed applied to every random component");
    };
    auto* importance = app.add_subcommand("importance", "Global LIME feature ranking -> importance.csv");
    add_common(importance);
    importance->add_flag("--export-model", export_model, "Also write the trained model as model.json");
    auto* interactions = app.add_subcommand("interactions", "NID interaction ranking -> interactions.csv");
    add_common(interactions);
    auto* optimize = app.add_subcommand("optimize", "Full reconstruction + selection pipeline -> report.json");
    add_common(optimize);
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset -> data.csv");
    add_common(generate);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const RunConfig cfg = load_run_config(config_path, overrides);
        if (importance->parsed()) {
            cmd_importance(cfg, export_model);
            out << "wrote " << (cfg.out / "importance.csv").string() << "\n";
        } else if (interactions->parsed()) {
            cmd_interactions(cfg);
            out << "wrote " << (cfg.out / "interactions.csv").string() << "\n";
        } else if (optimize->parsed()) {
            const json doc = cmd_optimize(cfg);
            out << "wrote " << (cfg.out / "report.json").string() << "\n";
            out << "mean R2 improvement %: " << doc["summary"]["r2_improvement_pct"]["mean"].dump()
                << ", mean RMSE improvement %: " << doc["summary"]["rmse_improvement_pct"]["mean"].dump() << "\n";
        } else if (generate->parsed()) {
            cmd_generate(cfg);
            out << "wrote " << (cfg.out / "data.csv").string() << "\n";
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace hfid::cli
