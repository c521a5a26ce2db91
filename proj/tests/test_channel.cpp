#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftm/channel.hpp"
#include "ftm/correction.hpp"
#include "ftm/eval.hpp"

using namespace ftm;

TEST_CASE("rssi_at closed-form values without shadowing") {
    ChannelModel ch;
    ch.pathloss_exponent = 2.0;
    ch.pl0_dbm = -40.0;
    Rng rng(1);
    CHECK(rssi_at(1.0, ch, rng) == -40.0);
    CHECK_THAT(rssi_at(10.0, ch, rng), Catch::Matchers::WithinAbs(-60.0, 1e-12));
    CHECK_THAT(rssi_at(100.0, ch, rng), Catch::Matchers::WithinAbs(-80.0, 1e-12));
    CHECK_THROWS_AS(rssi_at(0.0, ch, rng), Error);
    CHECK_THROWS_AS(rssi_at(-2.0, ch, rng), Error);
}

TEST_CASE("generate_dataset counts (dwell x anchors x tags)") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}};
    spec.tag_positions = {{5, 0, 0}};
    spec.dwell = 1;
    const auto ds = generate_dataset(spec);
    REQUIRE(ds.measurements.size() == 1);
    CHECK(ds.measurements[0].anchor_id == "anchor-0");
    CHECK(ds.measurements[0].true_distance_m == 5.0);

    ScenarioSpec bigger = spec;
    bigger.anchor_positions = {{0, 0, 0}, {10, 0, 0}};
    bigger.tag_positions = {{5, 0, 0}, {6, 0, 0}, {7, 0, 0}};
    bigger.dwell = 4;
    CHECK(generate_dataset(bigger).measurements.size() == 2 * 3 * 4);
}

TEST_CASE("generate_dataset is deterministic and positions own their streams") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}};
    spec.tag_positions = {{3, 0, 0}, {9, 0, 0}};
    spec.dwell = 5;
    spec.channel.shadowing_sigma_db = 3.0;
    spec.channel.rtt_noise_sigma_ns = 5.0;
    spec.channel.nlos_probability = 0.4;
    spec.channel.nlos_excess_mean_ns = 30.0;
    spec.channel.rng_seed = 77;

    const auto a = generate_dataset(spec);
    const auto b = generate_dataset(spec);
    CHECK(a == b);

    // Changing the second tag position must not disturb the first one's
    // measurements (independent derived streams per position).
    ScenarioSpec moved = spec;
    moved.tag_positions[1] = {4.5, 1.0, 0};
    const auto c = generate_dataset(moved);
    for (std::size_t i = 0; i < 5; ++i) CHECK(a.measurements[i] == c.measurements[i]);
}

TEST_CASE("every generated measurement validates") {
    auto spec = scenario_preset("indoor-40");
    spec.dwell = 2;
    const auto ds = generate_dataset(spec);
    for (const auto& m : ds.measurements) CHECK(validate_measurement(m).empty());
}

TEST_CASE("NLOS excess only ever inflates the round trip") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}};
    spec.tag_positions = {{10, 0, 0}};
    spec.dwell = 400;
    spec.channel.nlos_probability = 1.0;
    spec.channel.nlos_excess_mean_ns = 25.0;
    spec.channel.rtt_noise_sigma_ns = 0.0;
    const double ideal = rtt_from_distance(10.0);
    for (const auto& m : generate_dataset(spec).measurements) {
        CHECK(m.rtt_raw_ns >= ideal - 0.001);
    }
}

TEST_CASE("zero-noise channel reduces to the protocol invariant") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}, {12, 6, 2}};
    spec.tag_positions = {{2, 1, 1}, {7, 3, 1}, {11, 5, 1}};
    spec.dwell = 3;
    const double bound_m =
        kSpeedOfLightMps * static_cast<double>(spec.exchange.clock_resolution_ps) * 1e-12 / 2.0;
    for (const auto& m : generate_dataset(spec).measurements) {
        CHECK(std::abs(distance_from_rtt(m.rtt_raw_ns) - *m.true_distance_m) <= bound_m);
    }
}

TEST_CASE("sample RSSI spread approaches the shadowing sigma") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}};
    spec.tag_positions = {{8, 0, 0}};
    spec.dwell = 1000;
    spec.channel.shadowing_sigma_db = 4.0;
    const auto ds = generate_dataset(spec);
    double mean = 0.0;
    for (const auto& m : ds.measurements) mean += mean_frame_rssi_dbm(m);
    mean /= static_cast<double>(ds.measurements.size());
    double var = 0.0;
    for (const auto& m : ds.measurements) {
        var += (mean_frame_rssi_dbm(m) - mean) * (mean_frame_rssi_dbm(m) - mean);
    }
    const double stddev = std::sqrt(var / static_cast<double>(ds.measurements.size() - 1));
    CHECK_THAT(stddev, Catch::Matchers::WithinAbs(4.0, 0.4));
}

TEST_CASE("outdoor presets keep most raw conversions under 2.5 m error") {
    for (const char* name : {"outdoor-20", "outdoor-40"}) {
        const auto ds = generate_dataset(scenario_preset(name));
        std::vector<double> errors;
        for (const auto& m : ds.measurements) {
            errors.push_back(std::abs(distance_from_rtt(m.rtt_raw_ns) - *m.true_distance_m));
        }
        CHECK(percentile_below(ecdf(errors), 2.5) >= 0.75);
    }
}

TEST_CASE("indoor preset has the heavy right tail") {
    const auto ds = generate_dataset(scenario_preset("indoor-40"));
    std::vector<double> errors;
    for (const auto& m : ds.measurements) {
        errors.push_back(std::abs(distance_from_rtt(m.rtt_raw_ns) - *m.true_distance_m));
    }
    const auto curve = ecdf(errors);
    CHECK(curve.sorted_errors.back() >= 15.0);   // worst cases reach ~20 m
    CHECK(curve.quantile(0.90) >= 5.0);          // not just one outlier
    CHECK(percentile_below(curve, 2.5) < 0.75);  // clearly worse than outdoors
}

TEST_CASE("unknown preset throws") {
    CHECK_THROWS_AS(scenario_preset("underwater-80"), Error);
    for (const auto& name : scenario_preset_names()) CHECK_NOTHROW(scenario_preset(name));
}

TEST_CASE("vendor map fills rtt_est and dist_est") {
    ScenarioSpec spec;
    spec.anchor_positions = {{0, 0, 0}};
    spec.tag_positions = {{5, 0, 0}};
    spec.dwell = 2;
    PiecewiseLinearMap map = PiecewiseLinearMap::identity();
    map.segments[1] = {1.0, -3.0};
    spec.vendor_map = map;
    for (const auto& m : generate_dataset(spec).measurements) {
        REQUIRE(m.rtt_est_ns.has_value());
        REQUIRE(m.dist_est_m.has_value());
        CHECK_THAT(*m.rtt_est_ns,
                   Catch::Matchers::WithinAbs(apply_vendor_correction(m.rtt_raw_ns, map), 1e-12));
    }
}
