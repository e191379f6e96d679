#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "hfid/nid.hpp"

namespace hfid {

std::vector<double> aggregate_influence(const MlpWeights& weights) {
    weights.validate();
    std::vector<double> z(weights.output.size());
    for (std::size_t u = 0; u < z.size(); ++u) z[u] = std::abs(weights.output[u]);
    // z(l) = z(l+1)^T |W(l+1)|, walking down from the output to the first hidden layer.
    for (std::size_t k = weights.layers.size(); k-- > 1;) {
        const Matrix& m = weights.layers[k];
        std::vector<double> below(m.cols(), 0.0);
        for (std::size_t u = 0; u < m.rows(); ++u) {
            for (std::size_t c = 0; c < m.cols(); ++c) below[c] += z[u] * std::abs(m(u, c));
        }
        z.swap(below);
    }
    return z;
}

namespace {

double strength_given_influence(const Matrix& first, const std::vector<double>& z,
                                const std::vector<std::size_t>& features) {
    double total = 0.0;
    for (std::size_t i = 0; i < first.rows(); ++i) {
        double weakest = std::abs(first(i, features.front()));
        for (auto f : features) weakest = std::min(weakest, std::abs(first(i, f)));
        total += z[i] * weakest;
    }
    return total;
}

void check_feature_set(const MlpWeights& weights, const std::vector<std::size_t>& features) {
    if (features.size() < 2) throw std::invalid_argument("interaction_strength: need at least 2 features");
    for (auto f : features) {
        if (f >= weights.input_count()) throw std::invalid_argument("interaction_strength: feature index out of range");
    }
}

}  // namespace

double interaction_strength(const MlpWeights& weights, const std::vector<std::size_t>& features) {
    check_feature_set(weights, features);
    return strength_given_influence(weights.layers.front(), aggregate_influence(weights), features);
}

std::vector<InteractionCandidate> rank_candidates(const MlpWeights& weights) {
    const std::size_t d = weights.input_count();
    if (d < 2) throw std::invalid_argument("rank_candidates: need at least 2 features");
    const auto z = aggregate_influence(weights);
    const Matrix& first = weights.layers.front();

    std::set<std::vector<std::size_t>> sets;
    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < first.rows(); ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(first(i, a)) > std::abs(first(i, b));
        });
        for (std::size_t r = 2; r <= d; ++r) {
            std::vector<std::size_t> s(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
            std::sort(s.begin(), s.end());
            sets.insert(std::move(s));
        }
    }

    std::vector<InteractionCandidate> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back({s, strength_given_influence(first, z, s), {}});
    std::stable_sort(out.begin(), out.end(), [](const InteractionCandidate& a, const InteractionCandidate& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        if (a.features.size() != b.features.size()) return a.features.size() < b.features.size();
        return a.features < b.features;
    });
    return out;
}

void CutoffConfig::validate() const {
    if (mode == CutoffMode::FixedK && (!k || *k == 0)) {
        throw std::invalid_argument("cutoff: fixed_k requires a positive k");
    }
    if (max_candidates == 0) throw std::invalid_argument("cutoff: max_candidates must be positive");
}

std::vector<InteractionCandidate> cutoff_topk(const std::vector<InteractionCandidate>& ranked,
                                              const CutoffConfig& cfg) {
    cfg.validate();
    if (cfg.mode == CutoffMode::FixedK) {
        const std::size_t keep = std::min(*cfg.k, ranked.size());
        return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep)};
    }
    std::size_t m = 0;
    while (m < ranked.size() && m < cfg.max_candidates && ranked[m].strength > 0.0) ++m;
    if (m <= 1) return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(m)};

    // Truncate after the largest strength ratio between neighbours; ties keep more.
    std::size_t keep = m;
    double best_ratio = 1.0;
    for (std::size_t p = 0; p + 1 < m; ++p) {
        const double ratio = ranked[p].strength / ranked[p + 1].strength;
        if (ratio > 1.0 && ratio >= best_ratio) {
            best_ratio = ratio;
            keep = p + 1;
        }
    }
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep)};
}

std::vector<InteractionCandidate> detect_interactions(const Dataset& train, const MlpConfig& mlp_cfg,
                                                      const CutoffConfig& cut_cfg) {
    cut_cfg.validate();
    if (train.feature_count() < 2) throw std::invalid_argument("detect_interactions: need at least 2 features");
    const MlpWeights weights = train_mlp(train, mlp_cfg);
    auto kept = cutoff_topk(rank_candidates(weights), cut_cfg);
    for (auto& c : kept) {
        c.names.clear();
        for (auto f : c.features) c.names.push_back(train.features()[f].name);
    }
    return kept;
}

std::string to_string(CutoffMode m) { return m == CutoffMode::LargestGap ? "largest_gap" : "fixed_k"; }

CutoffMode cutoff_mode_from_string(const std::string& s) {
    if (s == "largest_gap") return CutoffMode::LargestGap;
    if (s == "fixed_k") return CutoffMode::FixedK;
    throw std::invalid_argument("unknown cutoff mode '" + s + "'");
}

}  // namespace hfid
