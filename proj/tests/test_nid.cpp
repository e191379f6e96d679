#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hfid/nid.hpp"
#include "hfid/synth.hpp"

using namespace hfid;

namespace {

MlpWeights single_layer(std::size_t units, std::size_t d, std::vector<double> w1, std::vector<double> w) {
    MlpWeights m;
    m.layers.push_back(Matrix(units, d, std::move(w1)));
    m.biases.push_back(std::vector<double>(units, 0.0));
    m.output = std::move(w);
    return m;
}

MlpWeights random_net(std::vector<std::size_t> sizes, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    MlpWeights m;
    std::size_t in = d;
    for (std::size_t s : sizes) {
        Matrix w(s, in);
        for (auto& v : w.data()) v = g(rng);
        m.layers.push_back(w);
        std::vector<double> b(s);
        for (auto& v : b) v = 0.1 * g(rng);
        m.biases.push_back(b);
        in = s;
    }
    m.output.resize(in);
    for (auto& v : m.output) v = g(rng);
    m.output_bias = 0.3;
    return m;
}

template <class F>
void for_each_param(MlpWeights& w, F f) {
    for (auto& l : w.layers)
        for (auto& v : l.data()) f(v);
    for (auto& b : w.biases)
        for (auto& v : b) f(v);
    for (auto& v : w.output) f(v);
    f(w.output_bias);
}

std::vector<double> flatten(MlpWeights w) {
    std::vector<double> out;
    for_each_param(w, [&](double& v) { out.push_back(v); });
    return out;
}

Dataset small_synthetic(std::vector<synth::Term> terms, std::size_t d, std::size_t n, std::uint64_t seed) {
    synth::SyntheticSpec s;
    s.n_rows = n;
    s.n_features = d;
    s.terms = std::move(terms);
    s.noise_sigma = 0.1;
    s.seed = seed;
    return synth::generate(s).data;
}

}  // namespace

TEST_CASE("aggregate influence hand values") {
    MlpWeights a = single_layer(2, 2, {1, 2, 3, 0}, {0.5, -1});
    CHECK(aggregate_influence(a) == std::vector<double>{0.5, 1.0});

    MlpWeights z = single_layer(2, 2, {0, 0, 0, 0}, {0, 0});
    CHECK(aggregate_influence(z) == std::vector<double>{0, 0});

    MlpWeights two = single_layer(2, 2, {1, 0, 0, 1}, {0, 0});
    two.layers.push_back(Matrix(2, 2, std::vector<double>{1, -2, 0, 1}));
    two.biases.push_back({0, 0});
    two.output = {1, -1};
    CHECK(aggregate_influence(two) == std::vector<double>{1, 3});
}

TEST_CASE("interaction strength hand example") {
    MlpWeights a = single_layer(2, 2, {1, 2, 3, 0}, {0.5, 1});
    CHECK(interaction_strength(a, {0, 1}) == doctest::Approx(0.5).epsilon(1e-15));
    MlpWeights dead = single_layer(2, 3, {1, 2, 0, 3, 4, 0}, {1, 1});
    CHECK(interaction_strength(dead, {0, 2}) == 0.0);
    CHECK(interaction_strength(dead, {0, 1, 2}) == 0.0);
    CHECK_THROWS_AS(interaction_strength(a, {0}), std::invalid_argument);
    CHECK_THROWS_AS(interaction_strength(a, {0, 5}), std::invalid_argument);
}

TEST_CASE("greedy candidates nest within a unit") {
    MlpWeights one = single_layer(1, 3, {5, 4, 1}, {1});
    auto c = rank_candidates(one);
    REQUIRE(c.size() == 2);
    CHECK(c[0].features == std::vector<std::size_t>{0, 1});
    CHECK(c[0].strength == 4.0);
    CHECK(c[1].features == std::vector<std::size_t>{0, 1, 2});
    CHECK(c[1].strength == 1.0);
}

TEST_CASE("candidates are deduplicated and sorted by strength") {
    MlpWeights w = random_net({8, 4}, 6, 3);
    auto c = rank_candidates(w);
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(seen.insert(c[i].features).second);
        CHECK(std::is_sorted(c[i].features.begin(), c[i].features.end()));
        CHECK(c[i].strength == interaction_strength(w, c[i].features));
        if (i > 0) CHECK(c[i - 1].strength >= c[i].strength);
    }
}

TEST_CASE("per-unit greedy set is the best set of its size for that unit") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> row(6);
        for (auto& v : row) v = u(rng);
        MlpWeights one = single_layer(1, 6, row, {1.0});
        auto cands = rank_candidates(one);
        auto oracle = synth::exhaustive_interaction_oracle(one, 6);
        // for a single-unit net the top candidate is the global optimum over all subsets
        CHECK(cands.front().strength == doctest::Approx(oracle.front().strength).epsilon(1e-15));
        for (const auto& c : cands) {
            for (const auto& s : oracle) {
                if (s.features.size() == c.features.size()) CHECK(s.strength <= c.strength + 1e-15);
            }
        }
    }
}

TEST_CASE("cutoff rules") {
    auto make = [](std::vector<double> s) {
        std::vector<InteractionCandidate> v;
        for (std::size_t i = 0; i < s.size(); ++i) v.push_back({{i, i + 1}, s[i], {}});
        return v;
    };
    CutoffConfig gap;
    CHECK(cutoff_topk(make({100, 90, 3, 2}), gap).size() == 2);
    CHECK(cutoff_topk({}, gap).empty());
    CHECK(cutoff_topk(make({5, 5, 5, 5}), gap).size() == 4);
    CHECK(cutoff_topk(make(std::vector<double>(30, 1.0)), gap).size() == 20);
    CHECK(cutoff_topk(make({4, 2, 0, 0}), gap).size() == 1);
    CHECK(cutoff_topk(make({3, 0}), gap).size() == 1);
    CHECK(cutoff_topk(make({0, 0}), gap).empty());

    CutoffConfig fixed;
    fixed.mode = CutoffMode::FixedK;
    fixed.k = 8;
    CHECK(cutoff_topk(make({8, 7, 6, 5, 4, 3, 2, 1}), fixed).size() == 8);
    CHECK(cutoff_topk(make({3, 2, 1}), fixed).size() == 3);
    fixed.k = 2;
    auto two = cutoff_topk(make({3, 2, 1}), fixed);
    CHECK(two.size() == 2);
    CHECK(two[1].strength == 2);

    CutoffConfig bad;
    bad.mode = CutoffMode::FixedK;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK(cutoff_mode_from_string(to_string(CutoffMode::LargestGap)) == CutoffMode::LargestGap);
    CHECK(cutoff_mode_from_string(to_string(CutoffMode::FixedK)) == CutoffMode::FixedK);
}

TEST_CASE("mlp gradient matches central differences") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
        MlpWeights w = random_net({2}, 3, 100 + point);
        Matrix x(4, 3);
        std::vector<double> y(4);
        for (auto& v : x.data()) v = g(rng);
        for (auto& v : y) v = g(rng);
        MlpWeights grad;
        mlp_objective(w, x, y, 0.0, &grad);
        auto analytic = flatten(grad);
        std::size_t k = 0;
        const double h = 1e-6;
        for_each_param(w, [&](double& p) {
            const double keep = p;
            p = keep + h;
            const double up = mlp_objective(w, x, y, 0.0);
            p = keep - h;
            const double down = mlp_objective(w, x, y, 0.0);
            p = keep;
            const double numeric = (up - down) / (2 * h);
            const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-7});
            worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
            ++k;
        });
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("l1 penalty adds its subgradient to weights but not biases") {
    MlpWeights w = random_net({3}, 2, 4);
    Matrix x(2, 2, std::vector<double>{0.1, 0.2, -0.3, 0.4});
    std::vector<double> y{1, -1};
    MlpWeights g0, g1;
    const double f0 = mlp_objective(w, x, y, 0.0, &g0);
    const double f1 = mlp_objective(w, x, y, 0.5, &g1);
    CHECK(f1 - f0 == doctest::Approx(0.5 * w.l1_norm()));
    for (std::size_t i = 0; i < w.layers[0].data().size(); ++i) {
        const double v = w.layers[0].data()[i];
        CHECK(g1.layers[0].data()[i] - g0.layers[0].data()[i] == doctest::Approx(0.5 * (v > 0 ? 1 : -1)));
    }
    CHECK(g1.biases == g0.biases);
    CHECK(g1.output_bias == g0.output_bias);
}

TEST_CASE("init and forward") {
    MlpConfig cfg;
    cfg.hidden_sizes = {4, 3};
    MlpWeights w = init_mlp(5, cfg);
    CHECK(w.input_count() == 5);
    CHECK(w.first_layer_units() == 4);
    CHECK(w.layers[1].rows() == 3);
    CHECK(w.output.size() == 3);
    CHECK(init_mlp(5, cfg) == w);
    w.validate();

    MlpWeights hand = single_layer(2, 2, {1, 2, 3, 0}, {0.5, 1});
    hand.biases[0] = {0, -10};
    hand.output_bias = 1.0;
    // unit 0: 1*1 + 2*1 = 3 -> 3; unit 1: 3 - 10 -> relu 0
    CHECK(mlp_forward(hand, std::vector<double>{1, 1}) == 2.5);

    MlpWeights broken = hand;
    broken.output = {1, 2, 3};
    CHECK_THROWS(broken.validate());
}

TEST_CASE("pure penalty pressure shrinks weights") {
    Dataset d = small_synthetic({{1.0, {0}}}, 3, 300, 1);
    Dataset zero(d.features(), d.values(), "y", std::vector<double>(d.rows(), 0.0));
    MlpConfig cfg;
    cfg.hidden_sizes = {8, 4};
    cfg.l1_lambda = 0.1;
    cfg.epochs = 100;
    cfg.learning_rate = 1e-2;
    const double before = init_mlp(3, cfg).l1_norm();
    const double after = train_mlp(zero, cfg).l1_norm();
    CHECK(after <= 0.5 * before);
}

TEST_CASE("training is bitwise deterministic and reduces the loss") {
    Dataset d = small_synthetic({{1.0, {0, 1}}, {1.0, {2}}}, 4, 400, 2);
    MlpConfig cfg;
    cfg.hidden_sizes = {8, 4};
    cfg.epochs = 30;
    MlpWeights a = train_mlp(d, cfg);
    CHECK(train_mlp(d, cfg) == a);

    MlpConfig none = cfg;
    none.epochs = 0;
    MlpWeights z = train_mlp(d, none);
    CHECK(z == init_mlp(4, cfg));
    CHECK(detect_interactions(d, none, CutoffConfig{}) == detect_interactions(d, none, CutoffConfig{}));
}

TEST_CASE("divergence names the epoch") {
    Dataset d = small_synthetic({{1.0, {0}}}, 2, 200, 3);
    MlpConfig cfg;
    cfg.hidden_sizes = {4};
    cfg.learning_rate = 1e200;
    cfg.epochs = 50;
    CHECK_THROWS_WITH_AS(train_mlp(d, cfg), doctest::Contains("epoch"), std::runtime_error);
}

TEST_CASE("recovers a planted pair") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Dataset d = small_synthetic({{1.0, {0, 1}}, {1.0, {2}}}, 6, 5000, seed);
        MlpConfig cfg;
        cfg.epochs = 60;
        cfg.seed = seed;
        auto found = detect_interactions(d, cfg, CutoffConfig{});
        bool top2 = false;
        for (std::size_t i = 0; i < std::min<std::size_t>(2, found.size()); ++i) {
            if (found[i].names == std::vector<std::string>{"x1", "x2"}) top2 = true;
        }
        hits += top2;
    }
    CHECK(hits >= 4);
}

TEST_CASE("a purely additive target yields weaker top strength") {
    int weaker = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        MlpConfig cfg;
        cfg.epochs = 60;
        cfg.seed = seed;
        Dataset mult = small_synthetic({{1.0, {0, 1}}, {1.0, {2}}}, 6, 5000, seed);
        Dataset lin = small_synthetic({{1.0, {0}}, {1.0, {1}}, {1.0, {2}}, {1.0, {3}}, {1.0, {4}}, {1.0, {5}}}, 6,
                                      5000, seed);
        const double sm = rank_candidates(train_mlp(mult, cfg)).front().strength;
        const double sl = rank_candidates(train_mlp(lin, cfg)).front().strength;
        weaker += sl < sm;
    }
    CHECK(weaker >= 4);
}

TEST_CASE("config validation") {
    MlpConfig c;
    c.hidden_sizes = {};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.hidden_sizes = {4, 0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.l1_lambda = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
