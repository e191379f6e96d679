#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfid/dataset.hpp"
#include "hfid/matrix.hpp"

namespace hfid {

struct MlpConfig {
    std::vector<std::size_t> hidden_sizes{64, 32, 16};
    double l1_lambda = 5e-4;
    double learning_rate = 1e-3;
    /// Zero leaves the network at its initialisation.
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fully connected ReLU network with a linear scalar output.
/// layers[k] has one row per unit of hidden layer k+1 and one column per input of that layer.
struct MlpWeights {
    std::vector<Matrix> layers;
    std::vector<std::vector<double>> biases;
    std::vector<double> output;  // w: coefficients of the last hidden layer
    double output_bias = 0.0;

    std::size_t input_count() const { return layers.empty() ? 0 : layers.front().cols(); }
    std::size_t first_layer_units() const { return layers.empty() ? 0 : layers.front().rows(); }
    /// Throws when chained dimensions disagree.
    void validate() const;
    /// Sum of |entries| over every weight matrix and the output vector (biases excluded).
    double l1_norm() const;
    bool operator==(const MlpWeights&) const = default;
};

MlpWeights init_mlp(std::size_t inputs, const MlpConfig& cfg);

double mlp_forward(const MlpWeights& weights, std::span<const double> x);

/// Mean squared error over the rows plus l1 * l1_norm(). When `gradient` is non-null it
/// receives the (sub)gradient, shaped like `weights`.
double mlp_objective(const MlpWeights& weights, const Matrix& x, std::span<const double> y, double l1,
                     MlpWeights* gradient = nullptr);

/// Adam mini-batch training on standardized inputs and target. The returned weights act on
/// standardized inputs.
MlpWeights train_mlp(const Dataset& train, const MlpConfig& cfg);

/// z(1): influence of each first-layer unit on the output through absolute weights.
std::vector<double> aggregate_influence(const MlpWeights& weights);

/// Sum over first-layer units of z_i * min_{f in features} |W1[i, f]|.
double interaction_strength(const MlpWeights& weights, const std::vector<std::size_t>& features);

struct InteractionCandidate {
    std::vector<std::size_t> features;  // sorted ascending
    double strength = 0.0;
    std::vector<std::string> names;     // filled when detected on a named dataset

    bool operator==(const InteractionCandidate&) const = default;
};

/// Greedy candidates: for each first-layer unit the top-r inputs by |weight| for r = 2..d,
/// deduplicated and sorted by descending strength.
std::vector<InteractionCandidate> rank_candidates(const MlpWeights& weights);

enum class CutoffMode { LargestGap, FixedK };

struct CutoffConfig {
    CutoffMode mode = CutoffMode::LargestGap;
    std::optional<std::size_t> k;
    std::size_t max_candidates = 20;

    void validate() const;
};

std::vector<InteractionCandidate> cutoff_topk(const std::vector<InteractionCandidate>& ranked,
                                              const CutoffConfig& cfg);

std::vector<InteractionCandidate> detect_interactions(const Dataset& train, const MlpConfig& mlp_cfg,
                                                      const CutoffConfig& cut_cfg);

std::string to_string(CutoffMode m);
CutoffMode cutoff_mode_from_string(const std::string& s);

}  // namespace hfid
