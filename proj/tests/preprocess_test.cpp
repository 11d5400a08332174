#include "dcload/error.hpp"
#include "dcload/preprocess.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

using namespace dcload;

namespace {

TimeSeries ramp(std::size_t n, double start = 0.0) {
    TimeSeries ts{start, 1.0, std::vector<double>(n)};
    std::iota(ts.values.begin(), ts.values.end(), 0.0);
    return ts;
}

} // namespace

TEST_CASE("fit_minmax picks the extremes") {
    auto s = fit_minmax(TimeSeries{0, 1, {0, 45000}});
    CHECK(s.min == 0.0);
    CHECK(s.max == 45000.0);
    s = fit_minmax(TimeSeries{0, 1, {3, 1, 2}});
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);
}

TEST_CASE("fit_minmax rejects constant and empty series") {
    CHECK_THROWS_AS(fit_minmax(TimeSeries{0, 1, {5, 5, 5}}), DegenerateScalerError);
    CHECK_THROWS_AS(fit_minmax(TimeSeries{0, 1, {}}), InsufficientDataError);
}

TEST_CASE("transform maps the endpoints and midpoint") {
    const ScalerParams s{0.0, 45000.0};
    const auto t = transform(TimeSeries{0, 1, {0.0, 45000.0, 22500.0}}, s);
    CHECK(t.values == std::vector<double>{0.0, 1.0, 0.5});
    const ScalerParams u{100.0, 300.0};
    CHECK(scale_value(100.0, u) == 0.0);
    CHECK(scale_value(300.0, u) == 1.0);
}

TEST_CASE("transform does not clip values outside the fitted range") {
    const ScalerParams s{100.0, 200.0};
    const auto t = transform(TimeSeries{0, 1, {50.0, 250.0}}, s);
    CHECK(t.values[0] == doctest::Approx(-0.5));
    CHECK(t.values[1] == doctest::Approx(1.5));
}

TEST_CASE("transform rejects a degenerate scaler") {
    CHECK_THROWS_AS(transform(TimeSeries{0, 1, {1.0}}, ScalerParams{2.0, 2.0}), DegenerateScalerError);
    CHECK_THROWS_AS(inverse_transform(TimeSeries{0, 1, {1.0}}, ScalerParams{3.0, 2.0}), DegenerateScalerError);
}

TEST_CASE("inverse_transform undoes transform") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lo(-1000.0, 1000.0);
    std::uniform_real_distribution<double> width(1e-3, 1e5);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = lo(rng);
        const ScalerParams s{a, a + width(rng)};
        std::uniform_real_distribution<double> x(s.min - s.range(), s.max + s.range());
        TimeSeries ts{0, 1, std::vector<double>(50)};
        for (double& v : ts.values) v = x(rng);
        const auto back = inverse_transform(transform(ts, s), s);
        for (std::size_t k = 0; k < ts.size(); ++k) {
            CHECK(std::abs(back.values[k] - ts.values[k]) < 1e-12 * s.range());
        }
    }
}

TEST_CASE("window count formula and boundaries") {
    CHECK(window_count(390, 300, 90) == 1);
    CHECK(window_count(391, 300, 90) == 2);
    CHECK_THROWS_AS(window_count(389, 300, 90), InsufficientDataError);
    CHECK_THROWS_AS(make_windows(ramp(389), 300, 90), InsufficientDataError);
    CHECK(make_windows(ramp(390), 300, 90).size() == 1);
}

TEST_CASE("window count holds for random N, H, P") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> len(1, 60);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t h = len(rng);
        const std::size_t p = len(rng);
        const std::size_t n = h + p + len(rng) - 1;
        const auto ds = make_windows(ramp(n), h, p);
        CHECK(ds.size() == n - h - p + 1);
    }
}

TEST_CASE("window contents follow the series with stride one") {
    const auto ds = make_windows(ramp(20, 7.0), 5, 3);
    REQUIRE(ds.size() == 13);
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const auto w = ds.window(k);
        CHECK(w.origin_index == k);
        REQUIRE(w.history.size() == 5);
        REQUIRE(w.target.size() == 3);
        for (std::size_t i = 0; i < 5; ++i) CHECK(w.history[i] == static_cast<double>(k + i));
        for (std::size_t j = 0; j < 3; ++j) CHECK(w.target[j] == static_cast<double>(k + 5 + j));
        // The target starts right after the history: no overlap, no gap.
        CHECK(w.target.data() == w.history.data() + w.history.size());
        CHECK(ds.target_time(k, 0) == 7.0 + static_cast<double>(k + 5));
    }
    CHECK_THROWS(ds.window(13));
}

TEST_CASE("split arithmetic floors and gives the remainder to test") {
    auto [a, b] = split_points(100, {});
    CHECK(a == 70);
    CHECK(b == 85);
    std::tie(a, b) = split_points(20, {});
    CHECK(a == 14);
    CHECK(b - a == 3);
    CHECK(20 - b == 3);
}

TEST_CASE("split ratios must be positive and sum to one") {
    CHECK_THROWS_AS(split_points(100, {0.5, 0.2, 0.2}), ConfigError);
    CHECK_THROWS_AS(split_points(100, {0.8, 0.3, -0.1}), ConfigError);
    CHECK_NOTHROW(split_points(100, {0.6, 0.2, 0.2}));
}

TEST_CASE("split with an empty partition is an error") {
    CHECK_THROWS_AS(split_points(2, {}), InsufficientDataError);
    CHECK_THROWS_AS(split_points(3, {}), InsufficientDataError);
    CHECK_NOTHROW(split_points(4, {}));
}

TEST_CASE("split boundaries are monotone and leak-free") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> len(1, 40);
    std::uniform_int_distribution<std::size_t> extra(10, 500);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t h = len(rng);
        const std::size_t p = len(rng);
        const std::size_t n = h + p + extra(rng);
        const auto ds = split_chronological(make_windows(ramp(n), h, p), {});
        const auto train = split_range(ds, Split::train);
        const auto val = split_range(ds, Split::val);
        const auto test = split_range(ds, Split::test);
        REQUIRE_FALSE(train.empty());
        REQUIRE_FALSE(val.empty());
        REQUIRE_FALSE(test.empty());
        CHECK(train.begin == 0);
        CHECK(train.end == val.begin);
        CHECK(val.end == test.begin);
        CHECK(test.end == ds.size());
        // Largest train origin < smallest val origin < smallest test origin.
        CHECK(ds.window(train.end - 1).origin_index < ds.window(val.begin).origin_index);
        CHECK(ds.window(val.end - 1).origin_index < ds.window(test.begin).origin_index);
        for (std::size_t k = 0; k < ds.size(); k += 7) {
            const auto w = ds.window(k);
            // Values equal their source index in a ramp.
            CHECK(w.target.front() > w.history.back());
        }
    }
}

TEST_CASE("prepare fits the scaler only on samples the train windows touch") {
    // 100 windows with H=4, P=2: train windows 0..69 use samples [0, 75).
    TimeSeries raw{0, 1, std::vector<double>(105, 10.0)};
    raw.values[3] = 0.0;
    raw.values[74] = 50.0;
    raw.values[75] = 1000.0;  // first sample outside the train windows
    const auto prep = prepare(raw, 4, 2, {});
    CHECK(prep.scaler.min == 0.0);
    CHECK(prep.scaler.max == 50.0);
    CHECK(prep.dataset.size() == 100);
    CHECK(prep.dataset.train_end() == 70);
    CHECK(prep.dataset.val_end() == 85);
    CHECK(prep.dataset.series().values[75] == doctest::Approx(20.0));
}

TEST_CASE("prepare rejects too-short series") {
    CHECK_THROWS_AS(prepare(ramp(389), 300, 90, {}), InsufficientDataError);
}
