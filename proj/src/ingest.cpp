#include "dcload/ingest.hpp"

#include "dcload/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string_view>
#include <utility>

namespace dcload {

namespace {

constexpr std::string_view kLogHeader = "timestamp,node_id,job_id,gpu_index,power_watts";

PowerRecord parse_record(std::string_view line, std::size_t line_no) {
    const auto fields = detail::split_csv(line);
    if (fields.size() != 5) {
        throw ParseError(line_no, "expected 5 columns, found " + std::to_string(fields.size()));
    }
    PowerRecord rec;
    auto ts = detail::parse_double(fields[0]);
    if (!ts || !std::isfinite(*ts)) {
        throw ParseError(line_no, "non-numeric timestamp '" + std::string(fields[0]) + "'");
    }
    rec.timestamp = *ts;
    if (fields[1].empty()) {
        throw ParseError(line_no, "empty node_id");
    }
    rec.node_id = std::string(fields[1]);
    if (!fields[2].empty()) {
        rec.job_id = std::string(fields[2]);
    }
    auto gpu = detail::parse_unsigned(fields[3]);
    if (!gpu) {
        throw ParseError(line_no, "bad gpu_index '" + std::string(fields[3]) + "'");
    }
    rec.gpu_index = *gpu;
    auto power = detail::parse_double(fields[4]);
    if (!power || !std::isfinite(*power)) {
        throw ParseError(line_no, "non-numeric power '" + std::string(fields[4]) + "'");
    }
    if (*power < 0.0) {
        throw ParseError(line_no, "negative power " + std::string(fields[4]));
    }
    rec.power = *power;
    return rec;
}

} // namespace

void check_physical(const TimeSeries& ts) {
    if (!(ts.step > 0.0) || !std::isfinite(ts.step)) {
        throw DataError("time series step must be positive");
    }
    if (!std::isfinite(ts.start_time)) {
        throw DataError("time series start time must be finite");
    }
    for (std::size_t k = 0; k < ts.values.size(); ++k) {
        const double v = ts.values[k];
        if (!std::isfinite(v) || v < 0.0) {
            throw DataError("sample " + std::to_string(k) + " is negative or non-finite");
        }
    }
}

std::vector<PowerRecord> parse_power_log(std::istream& source) {
    std::vector<PowerRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view view = detail::strip_cr(line);
        if (!header_seen) {
            if (view != kLogHeader) {
                throw FormatError("expected header '" + std::string(kLogHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        if (view.empty()) {
            continue;
        }
        out.push_back(parse_record(view, line_no));
    }
    if (!header_seen) {
        throw FormatError("missing header '" + std::string(kLogHeader) + "'");
    }
    return out;
}

TimeSeries aggregate_total_load(const std::vector<PowerRecord>& records, double bucket) {
    if (!(bucket > 0.0) || !std::isfinite(bucket)) {
        throw DataError("bucket width must be positive");
    }
    if (records.empty()) {
        throw InsufficientDataError("no power records to aggregate");
    }

    double earliest = records.front().timestamp;
    for (const auto& r : records) {
        earliest = std::min(earliest, r.timestamp);
    }
    const double origin = std::floor(earliest);

    auto bucket_of = [&](double t) {
        return static_cast<std::size_t>(std::floor((t - origin) / bucket));
    };

    std::size_t n_buckets = 0;
    for (const auto& r : records) {
        n_buckets = std::max(n_buckets, bucket_of(r.timestamp) + 1);
    }

    struct Accum {
        double sum = 0.0;
        std::size_t count = 0;
    };
    // Ordered map keeps the cross-device summation order stable.
    using DeviceKey = std::pair<std::string, unsigned>;
    std::map<DeviceKey, std::map<std::size_t, Accum>> per_device;
    for (const auto& r : records) {
        auto& acc = per_device[{r.node_id, r.gpu_index}][bucket_of(r.timestamp)];
        acc.sum += r.power;
        ++acc.count;
    }

    TimeSeries ts;
    ts.start_time = origin;
    ts.step = bucket;
    ts.values.assign(n_buckets, 0.0);
    for (const auto& [key, buckets] : per_device) {
        double held = 0.0;
        auto it = buckets.begin();
        for (std::size_t b = 0; b < n_buckets; ++b) {
            if (it != buckets.end() && it->first == b) {
                held = it->second.sum / static_cast<double>(it->second.count);
                ++it;
            }
            ts.values[b] += held;
        }
    }
    return ts;
}

TimeSeries resample(const TimeSeries& ts, double new_step) {
    if (!(ts.step > 0.0)) {
        throw DataError("source series has non-positive step");
    }
    const double ratio = new_step / ts.step;
    const double rounded = std::round(ratio);
    if (!(new_step > 0.0) || rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw DataError("new step must be a positive integer multiple of the source step");
    }
    const auto group = static_cast<std::size_t>(rounded);

    TimeSeries out;
    out.start_time = ts.start_time;
    out.step = ts.step * static_cast<double>(group);
    const std::size_t n_out = ts.values.size() / group;
    out.values.reserve(n_out);
    for (std::size_t g = 0; g < n_out; ++g) {
        double sum = 0.0;
        for (std::size_t j = 0; j < group; ++j) {
            sum += ts.values[g * group + j];
        }
        out.values.push_back(sum / static_cast<double>(group));
    }
    return out;
}

} // namespace dcload
