#include "dcload/series_io.hpp"

#include "dcload/error.hpp"
#include "text.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace dcload {

namespace {
constexpr std::string_view kSeriesHeader = "t_seconds,power_watts";
}

void write_series_csv(std::ostream& out, const TimeSeries& ts) {
    out << kSeriesHeader << '\n';
    for (std::size_t k = 0; k < ts.values.size(); ++k) {
        out << detail::format_double(ts.time_at(k)) << ','
            << detail::format_double(ts.values[k]) << '\n';
    }
}

TimeSeries read_series_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || detail::strip_cr(line) != kSeriesHeader) {
        throw FormatError("expected header '" + std::string(kSeriesHeader) + "'");
    }
    ++line_no;

    std::vector<double> times;
    TimeSeries ts;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::strip_cr(line);
        if (view.empty()) continue;
        const auto fields = detail::split_csv(view);
        if (fields.size() != 2) {
            throw ParseError(line_no, "expected 2 columns, found " + std::to_string(fields.size()));
        }
        const auto t = detail::parse_double(fields[0]);
        const auto p = detail::parse_double(fields[1]);
        if (!t || !std::isfinite(*t)) throw ParseError(line_no, "non-numeric t_seconds");
        if (!p || !std::isfinite(*p)) throw ParseError(line_no, "non-numeric power_watts");
        if (*p < 0.0) throw ParseError(line_no, "negative power");
        times.push_back(*t);
        ts.values.push_back(*p);
    }
    if (times.empty()) {
        return ts;
    }
    ts.start_time = times.front();
    ts.step = times.size() > 1 ? times[1] - times[0] : 1.0;
    if (!(ts.step > 0.0)) {
        throw ParseError(3, "timestamps must be strictly increasing");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - ts.time_at(k)) > 1e-6 * ts.step) {
            throw ParseError(k + 2, "timestamp off the uniform grid");
        }
    }
    return ts;
}

TimeSeries load_series_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    if (detail::strip_cr(first) == kSeriesHeader) {
        return read_series_csv(in);
    }
    auto records = parse_power_log(in);
    return aggregate_total_load(records, 1.0);
}

} // namespace dcload
