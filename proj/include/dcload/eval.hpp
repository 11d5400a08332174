#pragma once

#include "dcload/matrix.hpp"
#include "dcload/model.hpp"
#include "dcload/preprocess.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dcload {

// Forecast error metrics in watts (smape in percent).
struct MetricsReport {
    double rmse = 0.0;
    double mae = 0.0;
    double mbd = 0.0;    // mean(predicted - actual); > 0 means overestimation
    double smape = 0.0;  // 100/n * sum |p - a| / ((|a| + |p|) / 2), 0/0 terms count as 0
    double r_squared = 0.0;
    std::size_t n = 0;
};

// All metric functions throw ShapeError for unequal or empty inputs.
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
double mbd(std::span<const double> actual, std::span<const double> predicted);
double smape(std::span<const double> actual, std::span<const double> predicted);
// Throws UndefinedMetricError when actual has zero variance.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

MetricsReport compute_metrics(std::span<const double> actual, std::span<const double> predicted);

struct ResidualPoint {
    double t_seconds = 0.0;
    double actual = 0.0;
    double predicted = 0.0;
    double residual = 0.0;  // predicted - actual
};

using ResidualSeries = std::vector<ResidualPoint>;

struct Evaluation {
    MetricsReport metrics;
    // Trace of the last horizon step of every scored window.
    ResidualSeries residuals;
    // Per-window forecasts and targets in watts, one row per window of the
    // split (row r is window first_window + r).
    Matrix predicted;
    Matrix actual;
    std::size_t first_window = 0;
};

// Scores a split in watts. Every (window, horizon step) pair counts once in
// the metrics.
Evaluation evaluate_model(const ModelWeights& weights, const ScalerParams& scaler,
                          const WindowedDataset& data, Split split = Split::test);

// Aligned actual/predicted trace for one horizon step (0-based): one point
// per scored window, stamped with that step's target time.
ResidualSeries horizon_trace(const Evaluation& eval, const WindowedDataset& data, std::size_t step);

// {"mae":..,"mbd":..,"n":..,"r_squared":..,"rmse":..,"smape":..}
std::string metrics_to_json(const MetricsReport& m);

// `t_seconds,actual_w,predicted_w,residual_w`
void write_residuals_csv(std::ostream& out, const ResidualSeries& series);

} // namespace dcload
