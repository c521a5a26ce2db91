#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftm/core.hpp"
#include "ftm/correction.hpp"
#include "ftm/errors.hpp"
#include "ftm/protocol.hpp"
#include "ftm/rng.hpp"

namespace ftm {

/// Log-distance path loss with lognormal shadowing plus a Bernoulli NLOS
/// mixture adding exponential excess delay to the round trip.
struct ChannelModel {
    double pathloss_exponent = 2.0;
    double pl0_dbm = -40.0;  // mean RSSI at the d0 = 1 m reference
    double shadowing_sigma_db = 0.0;
    double rtt_noise_sigma_ns = 0.0;
    double nlos_probability = 0.0;
    double nlos_excess_mean_ns = 0.0;
    std::uint64_t rng_seed = 1;

    void check() const {
        if (pathloss_exponent <= 0) {
            throw Error(ErrorCode::InvalidArgument, "pathloss_exponent must be > 0");
        }
        if (shadowing_sigma_db < 0 || rtt_noise_sigma_ns < 0 || nlos_excess_mean_ns < 0) {
            throw Error(ErrorCode::InvalidArgument, "sigmas must be >= 0");
        }
        if (nlos_probability < 0 || nlos_probability > 1) {
            throw Error(ErrorCode::InvalidArgument, "nlos_probability must be in [0,1]");
        }
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Point&) const = default;
};

inline double distance(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// A measurement campaign layout: anchors at fixed positions, a tag moved
/// across a set of points, `dwell` bursts per (tag, anchor) pair.
struct ScenarioSpec {
    std::string name = "synthetic";
    Scenario scenario = Scenario::Synthetic;
    std::vector<Point> anchor_positions;
    std::vector<Point> tag_positions;
    Bandwidth bandwidth = Bandwidth::MHz40;
    int dwell = 1;
    ChannelModel channel;
    ExchangeConfig exchange;
    // When set, measurements also carry the emulated firmware estimates
    // rtt_est / dist_est derived through this map.
    std::optional<PiecewiseLinearMap> vendor_map;

    void check() const {
        if (anchor_positions.empty() || tag_positions.empty()) {
            throw Error(ErrorCode::InvalidArgument, "need >= 1 anchor and >= 1 tag position");
        }
        if (dwell < 1) throw Error(ErrorCode::InvalidArgument, "dwell must be >= 1");
        channel.check();
        exchange.check();
    }
};

/// Mean received power at distance d under the log-distance model:
/// pl0 - 10*n*log10(d/1m) plus one shadowing draw.
inline double rssi_at(double distance_m, const ChannelModel& ch, Rng& rng) {
    if (distance_m <= 0) {
        throw Error(ErrorCode::NonPositiveDistance, "rssi_at requires d > 0");
    }
    double rssi = ch.pl0_dbm - 10.0 * ch.pathloss_exponent * std::log10(distance_m);
    if (ch.shadowing_sigma_db > 0) rssi += rng.normal(0.0, ch.shadowing_sigma_db);
    return rssi;
}

/// Generates the full campaign. Each tag position owns a derived RNG
/// stream, so chunking the position loop across threads cannot change the
/// output; within a position, draws are ordered (per burst: NLOS excess,
/// RSSI, then the exchange).
inline Dataset generate_dataset(const ScenarioSpec& spec) {
    spec.check();

    Dataset ds;
    ds.name = spec.name;
    ds.scenario = spec.scenario;
    ds.measurements.reserve(spec.tag_positions.size() * spec.anchor_positions.size() *
                            static_cast<std::size_t>(spec.dwell));

    const Rng root(spec.channel.rng_seed);
    for (std::size_t tp = 0; tp < spec.tag_positions.size(); ++tp) {
        Rng rng = root.derive(tp);
        for (std::size_t a = 0; a < spec.anchor_positions.size(); ++a) {
            const double d = distance(spec.tag_positions[tp], spec.anchor_positions[a]);
            for (int r = 0; r < spec.dwell; ++r) {
                NoiseModel noise;
                noise.rtt_sigma_ns = spec.channel.rtt_noise_sigma_ns;
                noise.rtt_bias_ns = (spec.channel.nlos_probability > 0 &&
                                     rng.uniform() < spec.channel.nlos_probability)
                                        ? rng.exponential(spec.channel.nlos_excess_mean_ns)
                                        : 0.0;
                noise.rssi_mean_dbm = rssi_at(d, spec.channel, rng);

                FtmMeasurement m = simulate_exchange(d, spec.exchange, noise, rng);
                m.anchor_id = "anchor-" + std::to_string(a);
                m.bandwidth = spec.bandwidth;
                if (spec.vendor_map) {
                    m.rtt_est_ns = apply_vendor_correction(m.rtt_raw_ns, *spec.vendor_map);
                    m.dist_est_m = std::max(0.0, distance_from_rtt(*m.rtt_est_ns));
                }
                ds.measurements.push_back(std::move(m));
            }
        }
    }
    return ds;
}

/// Built-in scenario presets. Channel parameters are calibration
/// artifacts frozen against the qualitative error distributions of the
/// two campaign types (tight outdoor spread, heavy-tailed indoor errors);
/// geometry follows the campaign layouts (12x6 m room with corner
/// anchors; a 1..20 m outdoor line).
inline ScenarioSpec scenario_preset(std::string_view name) {
    ScenarioSpec spec;
    spec.exchange.frames_per_burst = 8;
    spec.exchange.clock_resolution_ps = 1;

    const auto room_anchors = [] {
        return std::vector<Point>{{0, 0, 2.5}, {12, 0, 2.5}, {12, 6, 2.5}, {0, 6, 2.5}};
    };
    const auto room_line = [] {
        std::vector<Point> tags;
        for (double x = 1.0; x <= 11.0; x += 0.5) tags.push_back({x, 3.0, 2.0});
        return tags;
    };
    const auto outdoor_line = [] {
        std::vector<Point> tags;
        for (double x = 1.0; x <= 20.0; x += 1.0) tags.push_back({x, 0.0, 1.75});
        return tags;
    };

    if (name == "indoor-40") {
        spec.name = "indoor-40";
        spec.scenario = Scenario::Indoor;
        spec.anchor_positions = room_anchors();
        spec.tag_positions = room_line();
        spec.bandwidth = Bandwidth::MHz40;
        spec.dwell = 20;
        spec.channel.pathloss_exponent = 2.4;
        spec.channel.pl0_dbm = -38.0;
        spec.channel.shadowing_sigma_db = 2.0;
        spec.channel.rtt_noise_sigma_ns = 6.0;
        spec.channel.nlos_probability = 0.55;
        spec.channel.nlos_excess_mean_ns = 60.0;
    } else if (name == "outdoor-20") {
        spec.name = "outdoor-20";
        spec.scenario = Scenario::Outdoor;
        spec.anchor_positions = {{0, 0, 1.75}};
        spec.tag_positions = outdoor_line();
        spec.bandwidth = Bandwidth::MHz20;
        spec.dwell = 60;
        spec.channel.pathloss_exponent = 2.0;
        spec.channel.pl0_dbm = -40.0;
        spec.channel.shadowing_sigma_db = 1.0;
        spec.channel.rtt_noise_sigma_ns = 10.0;
        spec.channel.nlos_probability = 0.0;
        spec.channel.nlos_excess_mean_ns = 0.0;
    } else if (name == "outdoor-40") {
        spec.name = "outdoor-40";
        spec.scenario = Scenario::Outdoor;
        spec.anchor_positions = {{0, 0, 1.75}};
        spec.tag_positions = outdoor_line();
        spec.bandwidth = Bandwidth::MHz40;
        spec.dwell = 60;
        spec.channel.pathloss_exponent = 2.0;
        spec.channel.pl0_dbm = -40.0;
        spec.channel.shadowing_sigma_db = 1.0;
        spec.channel.rtt_noise_sigma_ns = 6.0;
        spec.channel.nlos_probability = 0.0;
        spec.channel.nlos_excess_mean_ns = 0.0;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown preset: " + std::string(name));
    }
    return spec;
}

inline std::vector<std::string> scenario_preset_names() {
    return {"indoor-40", "outdoor-20", "outdoor-40"};
}

}  // namespace ftm
