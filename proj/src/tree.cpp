#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hfid/regressors.hpp"

namespace hfid {

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes_.empty()) throw std::logic_error("RegressionTree: predict on an unfitted tree");
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    // children are always appended after their parent
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
        best = std::max(best, d[i]);
    }
    return best;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> y, std::span<const double> w,
                const TreeParams& params, std::mt19937_64& rng)
        : x_(x), y_(y), w_(w), params_(params), rng_(rng) {
        const std::size_t d = x.cols();
        if (params.feature_fraction >= 1.0) {
            features_per_split_ = d;
        } else {
            features_per_split_ = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.feature_fraction * static_cast<double>(d))));
        }
        all_features_.resize(d);
        std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    }

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double sw = 0.0, swy = 0.0, swyy = 0.0;
        bool pure = true;
        for (auto r : rows) {
            sw += w_[r];
            swy += w_[r] * y_[r];
            swyy += w_[r] * y_[r] * y_[r];
            if (y_[r] != y_[rows.front()]) pure = false;
        }
        TreeNode node;
        node.samples = rows.size();
        // a pure node keeps its target exactly instead of a rounded weighted mean
        node.value = pure ? y_[rows.front()] : (sw > 0.0 ? swy / sw : 0.0);

        const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
        if (!pure && depth_ok && rows.size() >= 2 * params_.min_samples_leaf && sw > 0.0) {
            const double parent_sse = swyy - swy * swy / sw;
            SplitChoice best = find_split(rows, parent_sse);
            if (best.feature >= 0) {
                std::vector<std::size_t> left, right;
                for (auto r : rows) {
                    (x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
                }
                rows.clear();
                rows.shrink_to_fit();
                node.feature = best.feature;
                node.threshold = best.threshold;
                nodes_[static_cast<std::size_t>(id)] = node;
                const int l = grow(std::move(left), depth + 1);
                const int r = grow(std::move(right), depth + 1);
                nodes_[static_cast<std::size_t>(id)].left = l;
                nodes_[static_cast<std::size_t>(id)].right = r;
                return id;
            }
        }
        nodes_[static_cast<std::size_t>(id)] = node;
        return id;
    }

    std::vector<std::size_t> candidate_features() {
        if (features_per_split_ >= all_features_.size()) return all_features_;
        std::vector<std::size_t> pool = all_features_;
        for (std::size_t i = 0; i < features_per_split_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng_)]);
        }
        pool.resize(features_per_split_);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    SplitChoice find_split(const std::vector<std::size_t>& rows, double parent_sse) {
        SplitChoice best;
        const std::size_t n = rows.size();
        const std::size_t min_leaf = params_.min_samples_leaf;
        // Splits that do not beat floating-point noise in the SSE are not reductions.
        const double min_gain = 1e-12 * std::max(1.0, std::abs(parent_sse));
        std::vector<std::pair<double, std::size_t>> sorted(n);
        for (auto f : candidate_features()) {
            for (std::size_t i = 0; i < n; ++i) sorted[i] = {x_(rows[i], f), rows[i]};
            std::sort(sorted.begin(), sorted.end());
            double lw = 0.0, lwy = 0.0, lwyy = 0.0;
            double tw = 0.0, twy = 0.0, twyy = 0.0;
            for (auto& [v, r] : sorted) {
                tw += w_[r];
                twy += w_[r] * y_[r];
                twyy += w_[r] * y_[r] * y_[r];
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto r = sorted[i].second;
                lw += w_[r];
                lwy += w_[r] * y_[r];
                lwyy += w_[r] * y_[r] * y_[r];
                const std::size_t left_count = i + 1;
                if (left_count < min_leaf) continue;
                if (n - left_count < min_leaf) break;
                if (sorted[i].first == sorted[i + 1].first) continue;
                const double rw = tw - lw;
                if (lw <= 0.0 || rw <= 0.0) continue;
                const double left_sse = lwyy - lwy * lwy / lw;
                const double right_sse = (twyy - lwyy) - (twy - lwy) * (twy - lwy) / rw;
                const double gain = parent_sse - left_sse - right_sse;
                if (gain > min_gain && gain > best.gain) {
                    double mid = 0.5 * (sorted[i].first + sorted[i + 1].first);
                    if (!(mid < sorted[i + 1].first)) mid = sorted[i].first;
                    best = {static_cast<int>(f), mid, gain};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const double> y_;
    std::span<const double> w_;
    const TreeParams& params_;
    std::mt19937_64& rng_;
    std::size_t features_per_split_ = 0;
    std::vector<std::size_t> all_features_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                        const std::vector<std::size_t>& rows, const TreeParams& params, std::mt19937_64& rng) {
    if (rows.empty()) throw std::invalid_argument("fit_tree: no rows");
    if (y.size() != x.rows() || weights.size() != x.rows()) {
        throw std::invalid_argument("fit_tree: size mismatch");
    }
    if (params.min_samples_leaf == 0) throw std::invalid_argument("fit_tree: min_samples_leaf must be >= 1");
    TreeBuilder builder(x, y, weights, params, rng);
    return RegressionTree(builder.build(rows));
}

}  // namespace hfid
