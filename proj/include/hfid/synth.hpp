#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hfid/dataset.hpp"
#include "hfid/matrix.hpp"
#include "hfid/nid.hpp"

namespace hfid::synth {

/// coefficient * product of the listed features (a single feature is a linear term).
struct Term {
    double coefficient = 1.0;
    std::vector<std::size_t> features;
    bool operator==(const Term&) const = default;
};

enum class FeatureDistribution { Uniform, Normal };

struct SyntheticSpec {
    std::size_t n_rows = 1000;
    std::size_t n_features = 2;
    std::vector<Term> terms;
    double noise_sigma = 0.0;
    FeatureDistribution distribution = FeatureDistribution::Uniform;  // uniform[-1, 1] or N(0, 1)
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    Dataset data;
    std::vector<Term> ground_truth;
};

/// Features are named x1..xd, the target y. Deterministic per seed.
SyntheticData generate(const SyntheticSpec& spec);

/// Noise-free value of the terms at one row.
double evaluate_terms(const std::vector<Term>& terms, std::span<const double> x);

struct BruteForceLasso {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double objective = 0.0;
};

/// Exhaustive grid minimisation of the weighted lasso objective for up to 3 features.
/// Per axis the box is [-2|b_ols| - 1, 2|b_ols| + 1] with `resolution` points, followed by
/// one refinement grid spanning a coarse cell either side of the best point.
BruteForceLasso brute_force_lasso(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                                  double lambda, std::size_t resolution = 401);

struct SubsetStrength {
    std::vector<std::size_t> features;
    double strength = 0.0;
};

/// Strength of every feature subset of size 2..max_order, sorted descending.
/// Computed from the weights directly, without the nid module's scoring path.
std::vector<SubsetStrength> exhaustive_interaction_oracle(const MlpWeights& weights, std::size_t max_order);

std::string to_string(FeatureDistribution d);
FeatureDistribution feature_distribution_from_string(const std::string& s);

}  // namespace hfid::synth
