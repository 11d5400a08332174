#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace dcload {

// One line of a per-GPU power log.
struct PowerRecord {
    double timestamp = 0.0;  // seconds since epoch
    std::string node_id;
    std::optional<std::string> job_id;
    unsigned gpu_index = 0;
    double power = 0.0;  // watts
};

// Uniformly sampled load series: sample k sits at start_time + k * step.
struct TimeSeries {
    double start_time = 0.0;
    double step = 1.0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    double time_at(std::size_t k) const noexcept {
        return start_time + static_cast<double>(k) * step;
    }
};

// Throws DataError unless step > 0 and every value is finite and >= 0.
// Normalized series legitimately go negative, so this is only applied to
// physical (watt) series.
void check_physical(const TimeSeries& ts);

// Parses `timestamp,node_id,job_id,gpu_index,power_watts` CSV. Empty job_id
// fields become std::nullopt. Throws FormatError on a bad header and
// ParseError (with the 1-based line number) on a bad row.
std::vector<PowerRecord> parse_power_log(std::istream& source);

// Sums per-device bucket means into one facility-level series.
//
// Buckets have width `bucket` and start at floor(earliest timestamp). Inside
// a bucket each (node_id, gpu_index) stream is averaged; a device with no
// samples in a bucket holds its previous bucket mean, and contributes zero
// before its first sample. job_id does not partition devices: a GPU that
// switches jobs is still one power stream.
TimeSeries aggregate_total_load(const std::vector<PowerRecord>& records, double bucket);

// Downsamples by an integer factor, averaging each group of
// new_step / ts.step samples. A trailing partial group is dropped.
TimeSeries resample(const TimeSeries& ts, double new_step);

} // namespace dcload
