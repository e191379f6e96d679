#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hfid/pipeline.hpp"
#include "hfid/serialize.hpp"
#include "hfid/synth.hpp"

namespace hfid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct Overrides {
    std::optional<std::string> data;
    std::optional<std::string> target;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

/// Everything one command needs, resolved from the JSON config plus flag overrides.
struct RunConfig {
    std::filesystem::path data;
    std::string target;
    std::optional<std::size_t> train_count;
    double train_fraction = 0.75;
    PipelineConfig pipeline;
    std::filesystem::path out = "out";
    std::size_t repetitions = 5;
    std::optional<synth::SyntheticSpec> synthetic;

    /// Split with train_count resolved against the row count.
    SplitSpec split_for(std::size_t rows) const;
    /// Copy with every seed shifted by `repetition`.
    PipelineConfig pipeline_for(std::size_t repetition) const;
};

/// Relative paths in the file resolve against the config file's directory; overrides
/// resolve against the working directory. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& config_path, const Overrides& overrides);
RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir, const Overrides& overrides);

/// Loads the dataset named by the config; a missing file is a configuration error.
Dataset load_data(const RunConfig& cfg);

void cmd_importance(const RunConfig& cfg, bool export_model);
void cmd_interactions(const RunConfig& cfg);
json cmd_optimize(const RunConfig& cfg);
void cmd_generate(const RunConfig& cfg);

/// Full command-line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hfid::cli
