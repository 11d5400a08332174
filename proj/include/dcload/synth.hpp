#pragma once

#include "dcload/ingest.hpp"

#include <cstddef>
#include <cstdint>

namespace dcload {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    double mean() const noexcept { return 0.5 * (lo + hi); }
    bool operator==(const Range&) const = default;
};

// Parameters of the synthetic facility trace. Defaults describe a mid-size
// GPU cluster: ~6 kW idle floor, a few concurrent multi-kW training jobs,
// 45 kW peak.
struct SynthConfig {
    std::size_t duration = 20000;  // samples at 1 Hz
    std::uint64_t seed = 42;
    double base_load = 6000.0;            // W
    double arrival_rate = 3.0;            // jobs per hour
    Range job_power{2000.0, 10000.0};     // W at full utilisation
    Range job_duration{1200.0, 5400.0};   // s
    Range iteration_period{5.0, 20.0};    // s
    double iteration_amplitude = 0.1;     // max fractional dip during the low half-period
    double noise_std = 100.0;             // W
    double spike_probability = 0.001;     // per second
    Range spike_magnitude{500.0, 3000.0}; // W, sign drawn separately
    double peak_cap = 45000.0;            // W

    bool operator==(const SynthConfig&) const = default;
};

// Throws ConfigError for empty or inverted ranges, negative rates, or a
// cap not above the base load.
void validate(const SynthConfig& config);

// Generates a 1 Hz trace starting at t = 0:
//
//   base_load + sum of active job pulses + noise + spike, clipped to [0, cap]
//
// A job is a rectangular pulse of constant power, reduced by its amplitude
// fraction during the second half of every iteration period. Arrivals are
// Poisson and begin job_duration.hi seconds before t = 0 so the trace starts
// in steady state.
//
// Draw order from one mt19937_64(seed): first the jobs in arrival order
// (inter-arrival gap, power, duration, period, amplitude, phase), then for
// each second the noise (only when noise_std > 0), a uniform spike test and,
// on a hit, the spike magnitude and sign.
TimeSeries generate(const SynthConfig& config);

// Long-run mean implied by the config before clipping:
// base + rate * E[duration] * E[power] * (1 - E[amplitude] / 2).
double expected_mean_load(const SynthConfig& config);

} // namespace dcload
