#include "dcload/error.hpp"
#include "dcload/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace dcload;

namespace {

double mean_of(const TimeSeries& ts) {
    return std::accumulate(ts.values.begin(), ts.values.end(), 0.0) / static_cast<double>(ts.size());
}

} // namespace

TEST_CASE("no jobs, noise or spikes gives a flat base load") {
    SynthConfig c;
    c.duration = 500;
    c.arrival_rate = 0.0;
    c.noise_std = 0.0;
    c.spike_probability = 0.0;
    const auto ts = generate(c);
    REQUIRE(ts.size() == 500);
    CHECK(ts.start_time == 0.0);
    CHECK(ts.step == 1.0);
    for (double v : ts.values) CHECK(v == c.base_load);
}

TEST_CASE("same seed reproduces the trace bit for bit") {
    SynthConfig c;
    c.duration = 5000;
    CHECK(generate(c).values == generate(c).values);
    auto other = c;
    other.seed = c.seed + 1;
    CHECK(generate(other).values != generate(c).values);
}

TEST_CASE("traces are finite, non-negative and capped") {
    auto valid = [](const TimeSeries& ts, double cap) {
        return std::all_of(ts.values.begin(), ts.values.end(),
                           [&](double v) { return std::isfinite(v) && v >= 0.0 && v <= cap; });
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        // Crowded enough to hit the cap.
        SynthConfig busy;
        busy.duration = 20000;
        busy.seed = seed;
        busy.arrival_rate = 12.0;
        busy.peak_cap = 30000.0;
        const auto hot = generate(busy);
        REQUIRE(hot.size() == busy.duration);
        CHECK(valid(hot, busy.peak_cap));
        CHECK(*std::max_element(hot.values.begin(), hot.values.end()) == busy.peak_cap);

        // Idle floor with dips deep enough to hit zero.
        SynthConfig idle;
        idle.duration = 20000;
        idle.seed = seed;
        idle.arrival_rate = 0.0;
        idle.base_load = 1000.0;
        idle.spike_probability = 0.05;
        idle.spike_magnitude = {5000.0, 9000.0};
        const auto cold = generate(idle);
        CHECK(valid(cold, idle.peak_cap));
        CHECK(*std::min_element(cold.values.begin(), cold.values.end()) == 0.0);
    }
}

TEST_CASE("default trace stays within the 45 kW envelope and moves") {
    const auto ts = generate(SynthConfig{});
    REQUIRE(ts.size() == 20000);
    const auto [lo, hi] = std::minmax_element(ts.values.begin(), ts.values.end());
    CHECK(*hi <= 45000.0);
    CHECK(*lo >= 0.0);
    CHECK(*hi - *lo > 5000.0);
}

TEST_CASE("long-run mean matches the occupancy estimate within 10%") {
    SynthConfig c;
    c.duration = 100000;
    // Little's law: mean concurrent jobs = rate * mean duration; a job's mean
    // draw is its mid power less half the mean dip (dip ~ U(0, amplitude)).
    const double jobs = c.arrival_rate / 3600.0 * 0.5 * (c.job_duration.lo + c.job_duration.hi);
    const double per_job = 0.5 * (c.job_power.lo + c.job_power.hi) * (1.0 - 0.5 * 0.5 * c.iteration_amplitude);
    const double expected = c.base_load + jobs * per_job;
    CHECK(expected_mean_load(c) == doctest::Approx(expected).epsilon(1e-12));

    double total = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
        c.seed = 1000 + static_cast<std::uint64_t>(s);
        total += mean_of(generate(c));
    }
    const double mc = total / seeds;
    CAPTURE(mc);
    CAPTURE(expected);
    CHECK(std::abs(mc - expected) / expected < 0.10);
}

TEST_CASE("invalid configs are rejected") {
    auto bad = [](auto&& edit) {
        SynthConfig c;
        edit(c);
        return c;
    };
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.duration = 0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.peak_cap = c.base_load; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.job_power = {5.0, 5.0}; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.job_duration = {10.0, 1.0}; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.arrival_rate = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.noise_std = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.spike_probability = 1.5; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.iteration_amplitude = 2.0; })), ConfigError);
    CHECK_THROWS_AS(generate(bad([](SynthConfig& c) { c.iteration_period = {0.0, 0.0}; })), ConfigError);
}
