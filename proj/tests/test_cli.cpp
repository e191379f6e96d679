#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace hfid;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("hfid_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

int invoke(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

json small_config() {
    return {{"data", "data.csv"},
            {"target", "y"},
            {"out", "out"},
            {"repetitions", 1},
            {"split", {{"train_fraction", 0.75}, {"seed", 3}}},
            {"regressor", {{"kind", "random_forest"}, {"n_estimators", 10}}},
            {"lime", {{"n_perturbations", 200}}},
            {"pick", {{"budget", 15}}},
            {"mlp", {{"hidden_sizes", {8, 4}}, {"epochs", 5}}},
            {"synthetic",
             {{"n_rows", 300},
              {"n_features", 5},
              {"terms", {{{"coefficient", 1.0}, {"features", {1, 2}}}, {{"coefficient", 2.0}, {"features", {3}}}}},
              {"noise_sigma", 0.1},
              {"seed", 1}}}};
}

fs::path setup(const std::string& name, json cfg = small_config()) {
    fs::path dir = scratch(name);
    write(dir / "config.json", cfg.dump(2));
    cfg["out"] = ".";
    write(dir / "gen.json", cfg.dump(2));
    REQUIRE(invoke({"generate", "--config", (dir / "gen.json").string()}) == 0);
    REQUIRE(fs::exists(dir / "data.csv"));
    return dir;
}

}  // namespace

TEST_CASE("generate writes the synthetic dataset") {
    fs::path dir = setup("generate");
    Dataset d = load_csv(dir / "data.csv", "y");
    CHECK(d.rows() == 300);
    CHECK(d.feature_count() == 5);
}

TEST_CASE("importance writes one row per feature, ascending, deterministic") {
    fs::path dir = setup("importance");
    const std::string cfg = (dir / "config.json").string();
    REQUIRE(invoke({"importance", "--config", cfg, "--export-model"}) == 0);
    const std::string first = slurp(dir / "out" / "importance.csv");
    CHECK(lines(first) == 6);
    CHECK(first.rfind("rank,feature,weight\n", 0) == 0);
    CHECK(fs::exists(dir / "out" / "model.json"));
    REQUIRE(invoke({"importance", "--config", cfg}) == 0);
    CHECK(slurp(dir / "out" / "importance.csv") == first);
    // the strongest linear term is ranked most important
    const std::string last = first.substr(first.rfind('\n', first.size() - 2) + 1);
    CHECK(last.rfind("5,x3,", 0) == 0);
}

TEST_CASE("interactions respects fixed k") {
    json c = small_config();
    c["cutoff"] = {{"mode", "fixed_k"}, {"k", 3}};
    fs::path dir = setup("interactions", c);
    REQUIRE(invoke({"interactions", "--config", (dir / "config.json").string()}) == 0);
    const std::string text = slurp(dir / "out" / "interactions.csv");
    CHECK(text.rfind("rank,feature_set,strength\n", 0) == 0);
    CHECK(lines(text) <= 4);
    CHECK(lines(text) >= 2);
}

TEST_CASE("optimize writes every artifact; one repetition has null std") {
    fs::path dir = setup("optimize");
    const std::string cfg = (dir / "config.json").string();
    REQUIRE(invoke({"optimize", "--config", cfg}) == 0);
    for (auto f : {"report.json", "sweep.csv", "importance_stage1.csv", "importance_stage2.csv", "interactions.csv"}) {
        CHECK(fs::exists(dir / "out" / f));
    }
    json rep = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(rep["repetitions"].size() == 1);
    CHECK(rep["summary"]["r2_improvement_pct"]["std"].is_null());
    const auto& r0 = rep["repetitions"][0]["report"];
    CHECK(lines(slurp(dir / "out" / "sweep.csv")) == r0["k_prime"].get<std::size_t>() + 2);
    const auto& chosen = r0["sweep"][r0["chosen_t"].get<std::size_t>()];
    CHECK(r0["optimized_metrics"]["r2"] == chosen["r2"]);
    CHECK(r0["optimized_metrics"]["rmse"] == chosen["rmse"]);

    const std::string before = slurp(dir / "out" / "report.json");
    REQUIRE(invoke({"optimize", "--config", cfg}) == 0);
    CHECK(slurp(dir / "out" / "report.json") == before);
}

TEST_CASE("optimize with two repetitions reports a spread") {
    json c = small_config();
    c["repetitions"] = 2;
    fs::path dir = setup("optimize2", c);
    REQUIRE(invoke({"optimize", "--config", (dir / "config.json").string()}) == 0);
    json rep = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(rep["repetitions"].size() == 2);
    CHECK(rep["summary"]["r2_improvement_pct"]["std"].is_number());
    std::size_t expected = 1;
    for (const auto& r : rep["repetitions"]) expected += r["report"]["sweep"].size();
    CHECK(lines(slurp(dir / "out" / "sweep.csv")) == expected);
    CHECK(rep["repetitions"][1]["config"]["regressor"]["seed"] == 1);
}

TEST_CASE("overrides") {
    fs::path dir = setup("overrides");
    fs::path other = dir / "elsewhere";
    REQUIRE(invoke({"importance", "--config", (dir / "config.json").string(), "--out", other.string(), "--seed",
                    "9"}) == 0);
    CHECK(fs::exists(other / "importance.csv"));
    cli::RunConfig rc = cli::load_run_config(dir / "config.json", cli::Overrides{{}, {}, {}, 9});
    CHECK(rc.pipeline.regressor.seed == 9);
    CHECK(rc.pipeline.lime.seed == 9);
    CHECK(rc.pipeline.mlp.seed == 9);
    CHECK(rc.data == dir / "data.csv");
    CHECK(rc.split_for(300).train_count == 225);
}

TEST_CASE("exit codes") {
    fs::path dir = setup("exits");
    std::string err;
    CHECK(invoke({"importance"}, &err) == 2);
    CHECK(invoke({"nonsense", "--config", "x"}, &err) == 2);
    CHECK(invoke({"importance", "--config", (dir / "missing.json").string()}, &err) == 2);

    write(dir / "bad.json", "{ not json");
    CHECK(invoke({"importance", "--config", (dir / "bad.json").string()}, &err) == 2);

    json unknown = small_config();
    unknown["colour"] = "blue";
    write(dir / "unknown.json", unknown.dump());
    CHECK(invoke({"importance", "--config", (dir / "unknown.json").string()}, &err) == 2);
    CHECK(err.find("colour") != std::string::npos);

    json bad_value = small_config();
    bad_value["regressor"]["n_estimators"] = 0;
    write(dir / "badval.json", bad_value.dump());
    CHECK(invoke({"importance", "--config", (dir / "badval.json").string()}, &err) == 2);

    CHECK(invoke({"importance", "--config", (dir / "config.json").string(), "--data", "/nonexistent.csv"}, &err) == 2);

    write(dir / "broken.csv", "a,b,y\n1,2,3\n4,x,6\n");
    CHECK(invoke({"importance", "--config", (dir / "config.json").string(), "--data", (dir / "broken.csv").string()},
                 &err) == 1);
    CHECK(err.find("row 3") != std::string::npos);

    // budget larger than the training rows is a runtime failure
    json big = small_config();
    big["pick"]["budget"] = 100000;
    write(dir / "big.json", big.dump());
    CHECK(invoke({"importance", "--config", (dir / "big.json").string()}, &err) == 1);

    json nosynth = small_config();
    nosynth.erase("synthetic");
    write(dir / "nosynth.json", nosynth.dump());
    CHECK(invoke({"generate", "--config", (dir / "nosynth.json").string()}, &err) == 2);
}

TEST_CASE("empty interaction result writes a header-only csv") {
    fs::path dir = scratch("empty_interactions");
    // a trained network never has all-zero strengths, so the writer contract is checked directly
    write(dir / "interactions.csv", interactions_csv({}));
    CHECK(slurp(dir / "interactions.csv") == "rank,feature_set,strength\n");
}
