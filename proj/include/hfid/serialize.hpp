#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hfid/lime.hpp"
#include "hfid/nid.hpp"
#include "hfid/pipeline.hpp"
#include "hfid/regressors.hpp"
#include "hfid/synth.hpp"

namespace hfid {

/// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using nlohmann::json;

json to_json(const RegressorSpec& spec);
json to_json(const LimeConfig& cfg);
json to_json(const PickConfig& cfg);
json to_json(const MlpConfig& cfg);
json to_json(const CutoffConfig& cfg);
json to_json(const ReconstructionConfig& cfg);
json to_json(const SelectionConfig& cfg);
json to_json(const PipelineConfig& cfg);
json to_json(const GlobalRanking& ranking);
json to_json(const std::vector<InteractionCandidate>& interactions);
json to_json(const PipelineReport& report);
/// Tree structures and ensemble weights.
json model_summary(const TrainedModel& model);

/// Each reader starts from the defaults and overrides the keys present. Unknown keys and
/// invalid values raise ConfigError.
RegressorSpec regressor_spec_from_json(const json& j);
LimeConfig lime_config_from_json(const json& j);
PickConfig pick_config_from_json(const json& j);
MlpConfig mlp_config_from_json(const json& j);
CutoffConfig cutoff_config_from_json(const json& j);
ReconstructionConfig reconstruction_config_from_json(const json& j);
SelectionConfig selection_config_from_json(const json& j);
synth::SyntheticSpec synthetic_spec_from_json(const json& j);

/// rank,feature,weight with rank 1 the least important.
std::string ranking_csv(const GlobalRanking& ranking);
/// rank,feature_set,strength with names joined by ';'.
std::string interactions_csv(const std::vector<InteractionCandidate>& interactions);
/// repetition,t,r2,rmse
std::string sweep_csv(const std::vector<std::pair<std::size_t, std::vector<SweepPoint>>>& sweeps);

/// 17 significant digits, matching the dataset CSV writer.
std::string format_number(double v);

}  // namespace hfid
