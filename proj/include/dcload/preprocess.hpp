#pragma once

#include "dcload/ingest.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dcload {

// Bounds of a min-max scaler; max > min.
struct ScalerParams {
    double min = 0.0;
    double max = 1.0;

    double range() const noexcept { return max - min; }
};

ScalerParams fit_minmax(const TimeSeries& ts);
ScalerParams fit_minmax(std::span<const double> values);

// x -> (x - min) / (max - min). Values outside [min, max] are not clipped.
TimeSeries transform(const TimeSeries& ts, const ScalerParams& scaler);
// y -> y * (max - min) + min
TimeSeries inverse_transform(const TimeSeries& ts, const ScalerParams& scaler);

double scale_value(double x, const ScalerParams& scaler) noexcept;
double unscale_value(double y, const ScalerParams& scaler) noexcept;

// One (history, target) pair. The spans point into the owning
// WindowedDataset and are valid for as long as it is.
struct Window {
    std::span<const double> history;
    std::span<const double> target;
    std::size_t origin_index = 0;
};

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

// Stride-1 windows over a normalized series. Window k covers samples
// [k, k+H) as history and [k+H, k+H+P) as target. Windows are generated on
// demand from the stored series rather than copied.
class WindowedDataset {
public:
    WindowedDataset() = default;
    WindowedDataset(TimeSeries normalized, std::size_t lookback, std::size_t horizon);

    std::size_t size() const noexcept { return count_; }
    std::size_t lookback() const noexcept { return lookback_; }
    std::size_t horizon() const noexcept { return horizon_; }
    Window window(std::size_t k) const;

    const TimeSeries& series() const noexcept { return series_; }

    // Timestamp of the j-th target sample of window k.
    double target_time(std::size_t k, std::size_t j) const noexcept {
        return series_.time_at(k + lookback_ + j);
    }

    std::size_t train_end() const noexcept { return train_end_; }
    std::size_t val_end() const noexcept { return val_end_; }
    bool is_split() const noexcept { return split_; }
    void set_split(std::size_t train_end, std::size_t val_end);

private:
    TimeSeries series_;
    std::size_t lookback_ = 0;
    std::size_t horizon_ = 0;
    std::size_t count_ = 0;
    std::size_t train_end_ = 0;
    std::size_t val_end_ = 0;
    bool split_ = false;
};

enum class Split { train, val, test };

// Half-open window index range of a split.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin == end; }
};

IndexRange split_range(const WindowedDataset& ds, Split which);

// Number of stride-1 windows; throws InsufficientDataError if n < H + P.
std::size_t window_count(std::size_t n, std::size_t lookback, std::size_t horizon);

WindowedDataset make_windows(const TimeSeries& normalized, std::size_t lookback, std::size_t horizon);

// Throws ConfigError unless all three ratios are positive and sum to 1.
void validate(const SplitRatios& ratios);

// Split boundaries for `count` windows: floor(train * count) and
// floor((train + val) * count), remainder to test.
std::pair<std::size_t, std::size_t> split_points(std::size_t count, const SplitRatios& ratios);

WindowedDataset split_chronological(WindowedDataset ds, const SplitRatios& ratios);

// Everything the model stages need from one raw series.
struct PreparedData {
    ScalerParams scaler;
    WindowedDataset dataset;
};

// Full preprocessing chain: split indices are computed on the raw window
// count, the scaler is fit on the samples touched by training windows
// (history and target), then the whole series is scaled and windowed.
PreparedData prepare(const TimeSeries& raw, std::size_t lookback, std::size_t horizon,
                     const SplitRatios& ratios);

// Same chain with a scaler fixed in advance (e.g. loaded from a checkpoint).
PreparedData prepare_with_scaler(const TimeSeries& raw, const ScalerParams& scaler,
                                 std::size_t lookback, std::size_t horizon,
                                 const SplitRatios& ratios);

} // namespace dcload
