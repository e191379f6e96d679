#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hfid/regressors.hpp"

using namespace hfid;

namespace {

Dataset sample_data(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FeatureDescriptor> f;
    for (std::size_t j = 0; j < d; ++j) f.push_back({"f" + std::to_string(j), std::nullopt, {}});
    Matrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = u(rng);
        y[i] = 2.0 * x(i, 0) + x(i, 1) * x(i, 2) + 0.1 * u(rng);
    }
    return Dataset(std::move(f), std::move(x), "y", std::move(y));
}

}  // namespace

TEST_CASE("r2 and rmse hand values") {
    std::vector<double> t{1, 2, 3};
    CHECK(r2_score(t, t) == 1.0);
    CHECK(r2_score(t, std::vector<double>{2, 2, 2}) == 0.0);
    CHECK(r2_score(t, std::vector<double>{1, 2, 4}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS(r2_score(std::vector<double>{1, 1}, std::vector<double>{1, 2}));

    CHECK(rmse(t, t) == 0.0);
    CHECK(rmse(t, std::vector<double>{0.5, 1.5, 2.5}) == doctest::Approx(0.5));
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("unlimited decision tree memorizes distinct rows") {
    Dataset d = sample_data(200, 5, 1);
    RegressorSpec spec;
    spec.kind = RegressorKind::DecisionTree;
    TrainedModel m = train(spec, d);
    auto p = predict(m, d);
    CHECK(p == d.target());
    CHECK(r2_score(d.target(), p) == 1.0);
}

TEST_CASE("depth 0 tree predicts the mean") {
    Dataset d = sample_data(50, 3, 2);
    RegressorSpec spec;
    spec.kind = RegressorKind::DecisionTree;
    spec.max_depth = 0;
    TrainedModel m = train(spec, d);
    const double mean = std::accumulate(d.target().begin(), d.target().end(), 0.0) / 50.0;
    for (double v : predict(m, d)) CHECK(v == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.trees.front().leaf_count() == 1);
}

TEST_CASE("split rule: x <= threshold goes left, midpoint threshold") {
    Matrix x(4, 1, std::vector<double>{0, 1, 2, 3});
    std::vector<double> y{0, 0, 10, 10};
    std::vector<double> w(4, 1.0);
    std::vector<std::size_t> rows{0, 1, 2, 3};
    std::mt19937_64 rng(0);
    RegressionTree t = fit_tree(x, y, w, rows, TreeParams{1, 1, 1.0}, rng);
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].feature == 0);
    CHECK(t.nodes()[0].threshold == 1.5);
    CHECK(t.predict(std::vector<double>{1.5}) == 0.0);
    CHECK(t.predict(std::vector<double>{1.5000001}) == 10.0);
}

TEST_CASE("tie between features goes to the lowest index") {
    // both columns separate y identically
    Matrix x(4, 2, std::vector<double>{0, 0, 1, 1, 2, 2, 3, 3});
    std::vector<double> y{0, 0, 1, 1};
    std::vector<double> w(4, 1.0);
    std::vector<std::size_t> rows{0, 1, 2, 3};
    std::mt19937_64 rng(0);
    RegressionTree t = fit_tree(x, y, w, rows, TreeParams{1, 1, 1.0}, rng);
    CHECK(t.nodes()[0].feature == 0);
}

TEST_CASE("min_samples_leaf is respected") {
    Dataset d = sample_data(100, 3, 3);
    RegressorSpec spec;
    spec.kind = RegressorKind::DecisionTree;
    spec.min_samples_leaf = 10;
    TrainedModel m = train(spec, d);
    for (const auto& n : m.trees.front().nodes()) {
        if (n.feature < 0) CHECK(n.samples >= 10);
    }
}

TEST_CASE("forest of one without bagging equals a decision tree") {
    Dataset d = sample_data(200, 5, 4);
    for (std::optional<std::size_t> depth : {std::optional<std::size_t>{}, std::optional<std::size_t>{3}}) {
        RegressorSpec tree_spec;
        tree_spec.kind = RegressorKind::DecisionTree;
        tree_spec.max_depth = depth;
        RegressorSpec forest_spec = tree_spec;
        forest_spec.kind = RegressorKind::RandomForest;
        forest_spec.n_estimators = 1;
        forest_spec.bootstrap = false;
        forest_spec.feature_subsample = 1.0;
        CHECK(predict(train(tree_spec, d), d) == predict(train(forest_spec, d), d));
    }
}

TEST_CASE("random forest generalizes and is deterministic") {
    Dataset tr = sample_data(400, 5, 5);
    Dataset te = sample_data(200, 5, 6);
    RegressorSpec spec;
    spec.n_estimators = 30;
    spec.seed = 9;
    TrainedModel a = train(spec, tr);
    TrainedModel b = train(spec, tr);
    CHECK(predict(a, te) == predict(b, te));
    CHECK(evaluate(a, te).r2 > 0.7);
    spec.seed = 10;
    CHECK(predict(train(spec, tr), te) != predict(a, te));
}

TEST_CASE("adaboost with one estimator equals its base tree") {
    Dataset d = sample_data(150, 4, 7);
    RegressorSpec spec;
    spec.kind = RegressorKind::AdaBoost;
    spec.n_estimators = 1;
    TrainedModel m = train(spec, d);
    REQUIRE(m.trees.size() == 1);
    CHECK(m.trees.front().depth() <= kAdaBoostDefaultDepth);
    auto p = predict(m, d);
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(p[i] == m.trees.front().predict(d.values().row(i)));
}

TEST_CASE("adaboost sample weights stay normalized") {
    Dataset d = sample_data(300, 4, 8);
    for (LossShape shape : {LossShape::Linear, LossShape::Square, LossShape::Exponential}) {
        RegressorSpec spec;
        spec.kind = RegressorKind::AdaBoost;
        spec.n_estimators = 20;
        spec.loss_shape = shape;
        spec.max_depth = 2;
        BoostTrace trace;
        TrainedModel m = train(spec, d, &trace);
        CHECK(!m.trees.empty());
        CHECK(m.estimator_weights.size() == m.trees.size());
        for (double s : trace.sample_weight_sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        for (double l : trace.average_losses) CHECK(l >= 0.0);
        CHECK(evaluate(m, d).r2 > 0.5);
    }
}

TEST_CASE("adaboost on a constant target predicts the constant") {
    Dataset base = sample_data(40, 2, 9);
    Dataset d(base.features(), base.values(), "y", std::vector<double>(40, 3.25));
    RegressorSpec spec;
    spec.kind = RegressorKind::AdaBoost;
    TrainedModel m = train(spec, d);
    for (double v : predict(m, d)) CHECK(v == 3.25);
}

TEST_CASE("predict checks the column contract") {
    Dataset d = sample_data(30, 3, 10);
    RegressorSpec spec;
    spec.kind = RegressorKind::DecisionTree;
    TrainedModel m = train(spec, d);
    Dataset other(std::vector<FeatureDescriptor>{{"f0", {}, {}}, {"zz", {}, {}}, {"f2", {}, {}}}, d.values(), "y",
                  d.target());
    CHECK_THROWS_AS(predict(m, other), std::invalid_argument);
}

TEST_CASE("spec validation and names") {
    RegressorSpec s;
    s.n_estimators = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.feature_subsample = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.min_samples_leaf = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    for (auto k : {RegressorKind::DecisionTree, RegressorKind::RandomForest, RegressorKind::AdaBoost}) {
        CHECK(regressor_kind_from_string(to_string(k)) == k);
    }
    for (auto l : {LossShape::Linear, LossShape::Square, LossShape::Exponential}) {
        CHECK(loss_shape_from_string(to_string(l)) == l);
    }
    CHECK_THROWS(regressor_kind_from_string("svm"));
}
