#include <catch2/catch_amalgamated.hpp>

#include "ftm/correction.hpp"
#include "ftm/protocol.hpp"

using namespace ftm;

TEST_CASE("rtt_from_timestamps basic arithmetic") {
    CHECK(rtt_from_timestamps(0, 40'000, 60'000, 100'000) == 80.0);
}

TEST_CASE("rtt_from_timestamps with zero turnaround is (t4-t1)/1000") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto x = rng.uniform_int(0, 1'000'000);
        const auto total = rng.uniform_int(0, 2'000'000);
        CHECK(rtt_from_timestamps(0, x, x, total) == static_cast<double>(total) / 1000.0);
    }
}

TEST_CASE("rtt_from_timestamps matches the distance relation at 10 m") {
    // one-way time for 10 m: 10/c; round trip 2*10/c ~ 66.713 ns
    const double rtt_ns = rtt_from_distance(10.0);
    CHECK_THAT(rtt_ns, Catch::Matchers::WithinAbs(66.713, 0.001));
    const auto t4 = static_cast<std::int64_t>(std::llround(rtt_ns * 1000.0));
    const double recovered = rtt_from_timestamps(0, 0, 0, t4);
    CHECK_THAT(distance_from_rtt(recovered), Catch::Matchers::WithinAbs(10.0, 1e-3));
}

TEST_CASE("rtt_from_timestamps rejects within-device disorder") {
    CHECK_THROWS_AS(rtt_from_timestamps(100, 0, 0, 50), Error);    // t4 < t1
    CHECK_THROWS_AS(rtt_from_timestamps(0, 100, 50, 200), Error);  // t3 < t2
    // Cross-device disorder (t2 < t1) is legal; the clocks are unrelated.
    CHECK_NOTHROW(rtt_from_timestamps(1'000, 0, 100, 2'000));
}

TEST_CASE("simulate_exchange zero noise hits the ideal RTT") {
    ExchangeConfig cfg;
    NoiseModel zero;
    const auto m = simulate_exchange(10.0, cfg, zero);
    CHECK(m.num_frames == 8);
    CHECK(m.frames.size() == 8);
    CHECK_THAT(m.rtt_raw_ns, Catch::Matchers::WithinAbs(66.713, 0.002));
    const auto at_zero = simulate_exchange(0.0, cfg, zero);
    const double tick_ns = static_cast<double>(cfg.clock_resolution_ps) / 1000.0;
    CHECK(std::abs(at_zero.rtt_raw_ns) <= tick_ns);
}

TEST_CASE("simulate_exchange is deterministic under the seed") {
    ExchangeConfig cfg;
    cfg.rng_seed = 99;
    NoiseModel noise{3.0, 5.0, -55.0, 2.0};
    const auto a = simulate_exchange(7.5, cfg, noise);
    const auto b = simulate_exchange(7.5, cfg, noise);
    CHECK(a == b);
}

TEST_CASE("zero-noise round trip recovers distance within half a tick, any offsets") {
    NoiseModel zero;
    for (const std::int64_t tick : {std::int64_t{1}, std::int64_t{50}, std::int64_t{1000}}) {
        ExchangeConfig cfg;
        cfg.clock_resolution_ps = tick;
        Rng rng(17 + static_cast<std::uint64_t>(tick));
        const double bound_m = kSpeedOfLightMps * static_cast<double>(tick) * 1e-12 / 2.0;
        for (int i = 0; i < 100; ++i) {
            const double d = rng.uniform(0.0, 100.0);
            Rng burst = rng.derive(static_cast<std::uint64_t>(i));
            const auto m = simulate_exchange(d, cfg, zero, burst);
            CHECK(std::abs(distance_from_rtt(m.rtt_raw_ns) - d) <= bound_m);
        }
    }
}

TEST_CASE("generated measurements validate and frames are self-consistent") {
    ExchangeConfig cfg;
    cfg.clock_resolution_ps = 25;
    NoiseModel noise{4.0, 10.0, -60.0, 3.0};
    Rng rng(5);
    for (int i = 0; i < 25; ++i) {
        const auto m = simulate_exchange(rng.uniform(0, 40), cfg, noise, rng);
        CHECK(validate_measurement(m).empty());
        for (const auto& f : m.frames) {
            REQUIRE(f.timestamps.has_value());
            const double recomputed = rtt_from_timestamps(
                f.timestamps->t1_ps, f.timestamps->t2_ps, f.timestamps->t3_ps, f.timestamps->t4_ps);
            CHECK(std::abs(recomputed - f.rtt_ns) <= 0.5);
            CHECK(f.timestamps->t1_ps >= 0);
            CHECK(f.timestamps->t2_ps >= 0);
        }
    }
}

TEST_CASE("config validation") {
    ExchangeConfig cfg;
    cfg.frames_per_burst = 0;
    NoiseModel zero;
    CHECK_THROWS_AS(simulate_exchange(1.0, cfg, zero), Error);
    cfg.frames_per_burst = 8;
    cfg.clock_resolution_ps = 0;
    CHECK_THROWS_AS(simulate_exchange(1.0, cfg, zero), Error);
    cfg.clock_resolution_ps = 1;
    CHECK_THROWS_AS(simulate_exchange(-1.0, cfg, zero), Error);
}
