#pragma once

#include "dcload/ingest.hpp"

#include <filesystem>
#include <iosfwd>

namespace dcload {

// Two-column `t_seconds,power_watts` CSV.
void write_series_csv(std::ostream& out, const TimeSeries& ts);

// Reads the two-column layout back. The step is taken from the first two
// timestamps and every later timestamp must sit on that grid.
TimeSeries read_series_csv(std::istream& in);

// Loads either layout, picked by header: a two-column series is returned
// as is; a raw power log is aggregated onto a 1 s grid.
TimeSeries load_series_file(const std::filesystem::path& path);

} // namespace dcload
