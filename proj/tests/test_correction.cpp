#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftm/correction.hpp"
#include "ftm/rng.hpp"

using namespace ftm;

TEST_CASE("distance_from_rtt closed-form points") {
    CHECK(distance_from_rtt(0.0) == 0.0);
    CHECK_THAT(distance_from_rtt(66.713), Catch::Matchers::WithinAbs(10.0, 1e-3));
    CHECK_THAT(distance_from_rtt(6.671), Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK(distance_from_rtt(-10.0) < 0.0);
}

TEST_CASE("distance_from_rtt is linear to machine precision") {
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-500.0, 500.0);
        const double b = rng.uniform(-500.0, 500.0);
        const double lhs = distance_from_rtt(a + b);
        const double rhs = distance_from_rtt(a) + distance_from_rtt(b);
        CHECK(std::abs(lhs - rhs) <=
              1e-12 * std::max(1.0, std::abs(lhs) + std::abs(rhs)));
    }
}

namespace {

PiecewiseLinearMap example_map() {
    PiecewiseLinearMap map;
    map.breakpoints_ns = {10.0, 124.0};
    map.segments = {{1.0, 0.0}, {1.0, -5.0}, {1.0, -20.0}};
    return map;
}

}  // namespace

TEST_CASE("apply_vendor_correction selects segments left-closed on the right") {
    const auto identity = PiecewiseLinearMap::identity();
    CHECK(apply_vendor_correction(57.0, identity) == 57.0);

    const auto map = example_map();
    CHECK(apply_vendor_correction(50.0, map) == 45.0);
    CHECK(apply_vendor_correction(10.0, map) == 5.0);    // breakpoint belongs right
    CHECK(apply_vendor_correction(124.0, map) == 104.0); // second breakpoint too
    CHECK(apply_vendor_correction(9.999, map) == 9.999);
    CHECK(apply_vendor_correction(-3.0, map) == -3.0);   // segment 0 extrapolates
}

TEST_CASE("map invariants are enforced") {
    PiecewiseLinearMap bad;
    bad.breakpoints_ns = {10.0, 10.0};
    bad.segments = {{1, 0}, {1, 0}, {1, 0}};
    CHECK_THROWS_AS(apply_vendor_correction(1.0, bad), Error);
    bad.breakpoints_ns = {10.0, 124.0};
    bad.segments = {{1, 0}, {1, 0}};
    CHECK_THROWS_AS(apply_vendor_correction(1.0, bad), Error);
}

namespace {

std::vector<RttPair> sample_map(const PiecewiseLinearMap& map, int per_segment, double noise_sigma,
                                Rng& rng) {
    std::vector<RttPair> pairs;
    const double edges[4] = {0.0, map.breakpoints_ns[0], map.breakpoints_ns[1], 200.0};
    for (int seg = 0; seg < 3; ++seg) {
        for (int i = 0; i < per_segment; ++i) {
            const double x = rng.uniform(edges[seg], edges[seg + 1]);
            double y = apply_vendor_correction(x, map);
            if (noise_sigma > 0) y += rng.normal(0.0, noise_sigma);
            pairs.push_back({x, y});
        }
    }
    return pairs;
}

PiecewiseLinearMap vendor_like_map() {
    PiecewiseLinearMap map;
    map.breakpoints_ns = {10.0, 124.0};
    map.segments = {{0.95, 0.3}, {0.82, -1.2}, {1.08, -18.0}};
    return map;
}

}  // namespace

TEST_CASE("fit_segmented recovers a noiseless map almost exactly") {
    const auto truth = vendor_like_map();
    Rng rng(42);
    const auto pairs = sample_map(truth, 50, 0.0, rng);
    const auto fit = fit_segmented(pairs, truth.breakpoints_ns);
    for (int s = 0; s < 3; ++s) {
        CHECK_THAT(fit.map.segments[s].slope,
                   Catch::Matchers::WithinAbs(truth.segments[s].slope, 1e-9));
        CHECK_THAT(fit.map.segments[s].intercept_ns,
                   Catch::Matchers::WithinAbs(truth.segments[s].intercept_ns, 1e-7));
        CHECK(fit.segment_rmse_ns[s] < 1e-9);
    }
}

TEST_CASE("fit_segmented recovers slopes within 1% under noise") {
    const auto truth = vendor_like_map();
    Rng rng(4242);
    const auto pairs = sample_map(truth, 1000, 0.1, rng);
    const auto fit = fit_segmented(pairs, truth.breakpoints_ns);
    for (int s = 0; s < 3; ++s) {
        CHECK(std::abs(fit.map.segments[s].slope - truth.segments[s].slope) /
                  truth.segments[s].slope <
              0.01);
    }
}

TEST_CASE("fit_segmented needs two points per segment") {
    std::vector<RttPair> pairs = {{1, 1}, {5, 5}, {20, 15}, {30, 25}};  // nothing above 124
    try {
        fit_segmented(pairs, {10.0, 124.0});
        FAIL("expected InsufficientPointsInSegment");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPointsInSegment);
        CHECK(e.detail() == 2);
    }
}

TEST_CASE("segmented fit beats any single global line on segmented data") {
    const auto truth = vendor_like_map();
    Rng rng(9);
    const auto pairs = sample_map(truth, 300, 0.2, rng);
    const auto segmented = fit_segmented(pairs, truth.breakpoints_ns);
    const auto global = fit_segmented(pairs, {});
    CHECK(segmented.total_rmse_ns <= global.total_rmse_ns + 1e-12);
}

TEST_CASE("detect_breakpoints recovers 10 and 124 ns within a nanosecond") {
    const auto truth = vendor_like_map();
    Rng rng(7);
    const auto pairs = sample_map(truth, 700, 0.1, rng);
    const auto breakpoints = detect_breakpoints(pairs, 3);
    REQUIRE(breakpoints.size() == 2);
    CHECK_THAT(breakpoints[0], Catch::Matchers::WithinAbs(10.0, 1.0));
    CHECK_THAT(breakpoints[1], Catch::Matchers::WithinAbs(124.0, 1.0));
}

TEST_CASE("detect_breakpoints on single-line data is deterministic") {
    Rng rng(5);
    std::vector<RttPair> pairs;
    for (int i = 0; i < 120; ++i) {
        const double x = rng.uniform(0.0, 200.0);
        pairs.push_back({x, 0.9 * x + 1.0});
    }
    const auto a = detect_breakpoints(pairs, 3);
    const auto b = detect_breakpoints(pairs, 3);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    CHECK(a[0] < a[1]);
}

TEST_CASE("detect_breakpoints input guards") {
    std::vector<RttPair> tiny = {{1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(detect_breakpoints(tiny, 3), Error);
    try {
        detect_breakpoints(tiny, 3);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientData);
    }
    CHECK_THROWS_AS(detect_breakpoints(tiny, 1), Error);
}
