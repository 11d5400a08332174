#include "dcload/synth.hpp"

#include "dcload/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace dcload {

namespace {

void check_range(const Range& r, const char* name, double floor) {
    if (!(r.hi > r.lo) || !(r.lo >= floor) || !std::isfinite(r.hi)) {
        throw ConfigError(std::string(name) + " range must satisfy " + std::to_string(floor) +
                          " <= lo < hi");
    }
}

struct Job {
    double start;
    double power;
    double duration;
    double period;
    double amplitude;
    double phase;
};

} // namespace

void validate(const SynthConfig& c) {
    if (c.duration == 0) throw ConfigError("duration must be positive");
    if (!(c.base_load >= 0.0)) throw ConfigError("base_load must be non-negative");
    if (!(c.arrival_rate >= 0.0)) throw ConfigError("arrival_rate must be non-negative");
    check_range(c.job_power, "job_power", 0.0);
    check_range(c.job_duration, "job_duration", 0.0);
    if (!(c.job_duration.lo > 0.0)) throw ConfigError("job_duration must be positive");
    check_range(c.iteration_period, "iteration_period", 0.0);
    if (!(c.iteration_period.lo > 0.0)) throw ConfigError("iteration_period must be positive");
    if (!(c.iteration_amplitude >= 0.0 && c.iteration_amplitude <= 1.0)) {
        throw ConfigError("iteration_amplitude must lie in [0, 1]");
    }
    if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
    if (!(c.spike_probability >= 0.0 && c.spike_probability <= 1.0)) {
        throw ConfigError("spike_probability must lie in [0, 1]");
    }
    check_range(c.spike_magnitude, "spike_magnitude", 0.0);
    if (!(c.peak_cap > c.base_load)) throw ConfigError("peak_cap must exceed base_load");
}

TimeSeries generate(const SynthConfig& c) {
    validate(c);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](const Range& r) { return r.lo + (r.hi - r.lo) * unit(rng); };

    const double horizon = static_cast<double>(c.duration);
    std::vector<Job> jobs;
    if (c.arrival_rate > 0.0) {
        std::exponential_distribution<double> gap(c.arrival_rate / 3600.0);
        double t = -c.job_duration.hi;
        while (true) {
            t += gap(rng);
            if (t >= horizon) break;
            Job j;
            j.start = t;
            j.power = uniform(c.job_power);
            j.duration = uniform(c.job_duration);
            j.period = uniform(c.iteration_period);
            j.amplitude = c.iteration_amplitude * unit(rng);
            j.phase = unit(rng);
            jobs.push_back(j);
        }
    }

    TimeSeries ts;
    ts.start_time = 0.0;
    ts.step = 1.0;
    ts.values.assign(c.duration, c.base_load);

    for (const Job& j : jobs) {
        const double end = std::min(j.start + j.duration, horizon);
        const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(j.start)));
        for (std::size_t s = first; static_cast<double>(s) < end; ++s) {
            const double cycle = (static_cast<double>(s) - j.start) / j.period + j.phase;
            const bool high = cycle - std::floor(cycle) < 0.5;
            ts.values[s] += high ? j.power : j.power * (1.0 - j.amplitude);
        }
    }

    std::normal_distribution<double> noise(0.0, c.noise_std > 0.0 ? c.noise_std : 1.0);
    for (double& v : ts.values) {
        if (c.noise_std > 0.0) v += noise(rng);
        if (unit(rng) < c.spike_probability) {
            const double magnitude = uniform(c.spike_magnitude);
            v += unit(rng) < 0.5 ? -magnitude : magnitude;
        }
        v = std::clamp(v, 0.0, c.peak_cap);
    }
    return ts;
}

double expected_mean_load(const SynthConfig& c) {
    const double occupancy = c.arrival_rate / 3600.0 * c.job_duration.mean();
    return c.base_load + occupancy * c.job_power.mean() * (1.0 - c.iteration_amplitude / 4.0);
}

} // namespace dcload
