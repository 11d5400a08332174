#include "dcload/preprocess.hpp"

#include "dcload/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dcload {

ScalerParams fit_minmax(std::span<const double> values) {
    if (values.empty()) {
        throw InsufficientDataError("cannot fit a scaler to an empty series");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) {
        throw DegenerateScalerError("series is constant; min-max range is zero");
    }
    return {*lo, *hi};
}

ScalerParams fit_minmax(const TimeSeries& ts) {
    return fit_minmax(std::span<const double>(ts.values));
}

static void check_scaler(const ScalerParams& s) {
    if (!(s.max > s.min) || !std::isfinite(s.min) || !std::isfinite(s.max)) {
        throw DegenerateScalerError("scaler requires finite max > min");
    }
}

double scale_value(double x, const ScalerParams& scaler) noexcept {
    return (x - scaler.min) / (scaler.max - scaler.min);
}

double unscale_value(double y, const ScalerParams& scaler) noexcept {
    return y * (scaler.max - scaler.min) + scaler.min;
}

TimeSeries transform(const TimeSeries& ts, const ScalerParams& scaler) {
    check_scaler(scaler);
    TimeSeries out{ts.start_time, ts.step, {}};
    out.values.reserve(ts.values.size());
    for (double x : ts.values) out.values.push_back(scale_value(x, scaler));
    return out;
}

TimeSeries inverse_transform(const TimeSeries& ts, const ScalerParams& scaler) {
    check_scaler(scaler);
    TimeSeries out{ts.start_time, ts.step, {}};
    out.values.reserve(ts.values.size());
    for (double y : ts.values) out.values.push_back(unscale_value(y, scaler));
    return out;
}

std::size_t window_count(std::size_t n, std::size_t lookback, std::size_t horizon) {
    if (lookback == 0 || horizon == 0) {
        throw ConfigError("lookback and horizon must be positive");
    }
    if (n < lookback + horizon) {
        throw InsufficientDataError("series has " + std::to_string(n) + " samples; at least " +
                                    std::to_string(lookback + horizon) + " needed");
    }
    return n - lookback - horizon + 1;
}

WindowedDataset::WindowedDataset(TimeSeries normalized, std::size_t lookback, std::size_t horizon)
    : series_(std::move(normalized)),
      lookback_(lookback),
      horizon_(horizon),
      count_(window_count(series_.values.size(), lookback, horizon)) {}

Window WindowedDataset::window(std::size_t k) const {
    if (k >= count_) {
        throw ShapeError("window index out of range");
    }
    const std::span<const double> all(series_.values);
    return {all.subspan(k, lookback_), all.subspan(k + lookback_, horizon_), k};
}

void WindowedDataset::set_split(std::size_t train_end, std::size_t val_end) {
    if (train_end > val_end || val_end > count_) {
        throw ConfigError("split boundaries must satisfy 0 <= train_end <= val_end <= count");
    }
    train_end_ = train_end;
    val_end_ = val_end;
    split_ = true;
}

IndexRange split_range(const WindowedDataset& ds, Split which) {
    if (!ds.is_split()) {
        throw ConfigError("dataset has not been split");
    }
    switch (which) {
    case Split::train: return {0, ds.train_end()};
    case Split::val: return {ds.train_end(), ds.val_end()};
    case Split::test: return {ds.val_end(), ds.size()};
    }
    return {};
}

WindowedDataset make_windows(const TimeSeries& normalized, std::size_t lookback, std::size_t horizon) {
    return WindowedDataset(normalized, lookback, horizon);
}

void validate(const SplitRatios& r) {
    if (!(r.train > 0.0 && r.val > 0.0 && r.test > 0.0)) {
        throw ConfigError("split ratios must be positive");
    }
    if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }
}

std::pair<std::size_t, std::size_t> split_points(std::size_t count, const SplitRatios& r) {
    validate(r);
    // The small nudge keeps products like 0.85 * 100 from flooring to 84.
    const double n = static_cast<double>(count);
    const auto train_end = static_cast<std::size_t>(std::floor(r.train * n + 1e-9));
    const auto val_end = static_cast<std::size_t>(std::floor((r.train + r.val) * n + 1e-9));
    if (train_end == 0 || val_end == train_end || val_end >= count) {
        throw InsufficientDataError("split of " + std::to_string(count) +
                                    " windows leaves an empty partition");
    }
    return {train_end, val_end};
}

WindowedDataset split_chronological(WindowedDataset ds, const SplitRatios& ratios) {
    const auto [train_end, val_end] = split_points(ds.size(), ratios);
    ds.set_split(train_end, val_end);
    return ds;
}

PreparedData prepare_with_scaler(const TimeSeries& raw, const ScalerParams& scaler,
                                 std::size_t lookback, std::size_t horizon,
                                 const SplitRatios& ratios) {
    PreparedData out;
    out.scaler = scaler;
    out.dataset = split_chronological(make_windows(transform(raw, scaler), lookback, horizon), ratios);
    return out;
}

PreparedData prepare(const TimeSeries& raw, std::size_t lookback, std::size_t horizon,
                     const SplitRatios& ratios) {
    const std::size_t count = window_count(raw.size(), lookback, horizon);
    const auto [train_end, val_end] = split_points(count, ratios);
    // Training windows 0..train_end-1 touch samples [0, train_end - 1 + H + P).
    const std::size_t touched = train_end - 1 + lookback + horizon;
    const auto scaler = fit_minmax(std::span<const double>(raw.values).first(touched));
    return prepare_with_scaler(raw, scaler, lookback, horizon, ratios);
}

} // namespace dcload
