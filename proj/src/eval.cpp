#include "dcload/eval.hpp"

#include "dcload/error.hpp"
#include "dcload/network.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dcload {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p) {
    if (a.size() != p.size()) throw ShapeError("actual and predicted lengths differ");
    if (a.empty()) throw ShapeError("metrics need at least one sample");
}

} // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = predicted[i] - actual[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
    return sum / static_cast<double>(actual.size());
}

double mbd(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += predicted[i] - actual[i];
    return sum / static_cast<double>(actual.size());
}

double smape(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double denom = (std::abs(actual[i]) + std::abs(predicted[i])) / 2.0;
        if (denom > 0.0) sum += std::abs(predicted[i] - actual[i]) / denom;
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - mean;
        const double e = actual[i] - predicted[i];
        ss_tot += d * d;
        ss_res += e * e;
    }
    if (!(ss_tot > 0.0)) throw UndefinedMetricError("R^2 is undefined for a constant actual series");
    return 1.0 - ss_res / ss_tot;
}

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    MetricsReport m;
    m.rmse = rmse(actual, predicted);
    m.mae = mae(actual, predicted);
    m.mbd = mbd(actual, predicted);
    m.smape = smape(actual, predicted);
    m.r_squared = r_squared(actual, predicted);
    m.n = actual.size();
    return m;
}

Evaluation evaluate_model(const ModelWeights& weights, const ScalerParams& scaler,
                          const WindowedDataset& data, Split split) {
    if (weights.hyper.lookback != data.lookback() || weights.hyper.horizon != data.horizon()) {
        throw ShapeError("model lookback/horizon do not match the dataset windows");
    }
    const IndexRange range = split_range(data, split);
    if (range.empty()) throw InsufficientDataError("cannot evaluate an empty split");

    const std::size_t h = data.lookback();
    const std::size_t p = data.horizon();
    Evaluation ev;
    ev.first_window = range.begin;
    ev.predicted = Matrix(range.size(), p);
    ev.actual = Matrix(range.size(), p);

    constexpr std::size_t kBatch = 256;
    Network net;
    std::vector<double> histories;
    for (std::size_t first = 0; first < range.size(); first += kBatch) {
        const std::size_t n = std::min(kBatch, range.size() - first);
        histories.resize(n * h);
        for (std::size_t b = 0; b < n; ++b) {
            const auto win = data.window(range.begin + first + b);
            std::copy(win.history.begin(), win.history.end(), histories.begin() + static_cast<std::ptrdiff_t>(b * h));
            for (std::size_t j = 0; j < p; ++j) ev.actual(first + b, j) = unscale_value(win.target[j], scaler);
        }
        net.predict(weights, histories.data(), n, ev.predicted.data() + first * p);
    }
    for (double& v : ev.predicted.values()) v = unscale_value(v, scaler);

    ev.metrics = compute_metrics(ev.actual.values(), ev.predicted.values());
    ev.residuals = horizon_trace(ev, data, p - 1);
    return ev;
}

ResidualSeries horizon_trace(const Evaluation& ev, const WindowedDataset& data, std::size_t step) {
    if (step >= ev.predicted.cols()) throw ShapeError("horizon step out of range");
    ResidualSeries out;
    out.reserve(ev.predicted.rows());
    for (std::size_t r = 0; r < ev.predicted.rows(); ++r) {
        const double a = ev.actual(r, step);
        const double pr = ev.predicted(r, step);
        out.push_back({data.target_time(ev.first_window + r, step), a, pr, pr - a});
    }
    return out;
}

std::string metrics_to_json(const MetricsReport& m) {
    nlohmann::json j = {{"rmse", m.rmse}, {"mae", m.mae}, {"mbd", m.mbd},
                        {"smape", m.smape}, {"r_squared", m.r_squared}, {"n", m.n}};
    return j.dump(2) + "\n";
}

void write_residuals_csv(std::ostream& out, const ResidualSeries& series) {
    out << "t_seconds,actual_w,predicted_w,residual_w\n";
    for (const auto& p : series) {
        out << detail::format_double(p.t_seconds) << ',' << detail::format_double(p.actual) << ','
            << detail::format_double(p.predicted) << ',' << detail::format_double(p.residual) << '\n';
    }
}

} // namespace dcload
