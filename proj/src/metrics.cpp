#include <cmath>
#include <stdexcept>

#include "hfid/regressors.hpp"

namespace hfid {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("metric: length mismatch");
    if (a.empty()) throw std::invalid_argument("metric: empty input");
}

}  // namespace

double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
    check_lengths(y_true, y_pred);
    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(y_true.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    }
    if (ss_tot <= 0.0) throw std::invalid_argument("r2_score: y_true has zero variance");
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
    check_lengths(y_true, y_pred);
    double ss = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    }
    return std::sqrt(ss / static_cast<double>(y_true.size()));
}

PredictionMetrics evaluate(const TrainedModel& model, const Dataset& test) {
    const auto pred = predict(model, test);
    return {r2_score(test.target(), pred), rmse(test.target(), pred)};
}

}  // namespace hfid
