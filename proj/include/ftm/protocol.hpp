#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ftm/core.hpp"
#include "ftm/correction.hpp"
#include "ftm/errors.hpp"
#include "ftm/rng.hpp"

namespace ftm {

/// Parameters of one simulated initiator/responder exchange.
struct ExchangeConfig {
    int frames_per_burst = 8;
    std::int64_t clock_resolution_ps = 1;      // picoseconds per counter tick
    double processing_delay_mean_ns = 10'000;  // responder turnaround t3 - t2
    double processing_delay_jitter_ns = 100;
    std::uint64_t rng_seed = 1;

    void check() const {
        if (frames_per_burst < 1) {
            throw Error(ErrorCode::InvalidArgument, "frames_per_burst must be >= 1");
        }
        if (clock_resolution_ps < 1) {
            throw Error(ErrorCode::InvalidArgument, "clock_resolution_ps must be >= 1");
        }
        if (processing_delay_mean_ns < 0 || processing_delay_jitter_ns < 0) {
            throw Error(ErrorCode::InvalidArgument, "processing delays must be >= 0");
        }
    }
};

/// Per-frame perturbations applied on top of the ideal 2d/c round trip.
/// The bias term is the hook for burst-level NLOS excess delay.
struct NoiseModel {
    double rtt_sigma_ns = 0.0;
    double rtt_bias_ns = 0.0;
    double rssi_mean_dbm = -50.0;
    double rssi_sigma_db = 0.0;
};

/// RTT (ns) from the four timestamps (ps): (t4 - t1) - (t3 - t2). The
/// relation cancels both the clock offset and the responder turnaround, so
/// t2 >= t1 is not required; within-device ordering is.
inline double rtt_from_timestamps(std::int64_t t1_ps, std::int64_t t2_ps, std::int64_t t3_ps,
                                  std::int64_t t4_ps) {
    if (t4_ps < t1_ps || t3_ps < t2_ps) {
        throw Error(ErrorCode::InvalidOrdering, "t4 < t1 or t3 < t2");
    }
    return static_cast<double>((t4_ps - t1_ps) - (t3_ps - t2_ps)) / 1000.0;
}

namespace detail {

inline std::int64_t round_to_ticks(double value_ps, std::int64_t tick_ps) {
    return std::llround(value_ps / static_cast<double>(tick_ps));
}

}  // namespace detail

/// Simulates one FTM burst against a responder at the given distance,
/// using the supplied random stream (one stream per burst or per generator
/// position; see channel::generate_dataset).
///
/// Timestamps are built on the tick grid of cfg.clock_resolution_ps with
/// independent initiator and responder clock offsets, so each frame's
/// stored rtt is exactly reproducible from its own quadruple, and the
/// quantization error of rtt_raw against the ideal round trip stays within
/// half a tick per frame.
inline FtmMeasurement simulate_exchange(double true_distance_m, const ExchangeConfig& cfg,
                                        const NoiseModel& noise, Rng& rng) {
    cfg.check();
    if (true_distance_m < 0) {
        throw Error(ErrorCode::InvalidArgument, "true_distance must be >= 0");
    }

    const std::int64_t tick = cfg.clock_resolution_ps;
    const double ideal_rtt_ns = rtt_from_distance(true_distance_m);

    // Clock offsets in whole ticks, one pair per burst; up to ~1 ms so the
    // offset dwarfs the propagation time without overflowing anything.
    const std::int64_t max_offset_ticks = std::max<std::int64_t>(1, 1'000'000'000 / tick);
    const std::int64_t initiator_offset = rng.uniform_int(0, max_offset_ticks) * tick;
    const std::int64_t responder_offset = rng.uniform_int(0, max_offset_ticks) * tick;

    // Frames spaced 100 us apart on the shared ideal timeline.
    const std::int64_t frame_spacing_ps = (100'000'000 / tick) * tick;

    FtmMeasurement m;
    m.num_frames = cfg.frames_per_burst;
    m.frames.reserve(static_cast<std::size_t>(cfg.frames_per_burst));
    m.true_distance_m = true_distance_m;

    double rtt_sum_ns = 0.0;
    for (int k = 0; k < cfg.frames_per_burst; ++k) {
        double rtt_ns = ideal_rtt_ns + noise.rtt_bias_ns;
        if (noise.rtt_sigma_ns > 0) rtt_ns += rng.normal(0.0, noise.rtt_sigma_ns);
        rtt_ns = std::max(0.0, rtt_ns);

        double turnaround_ns = cfg.processing_delay_mean_ns;
        if (cfg.processing_delay_jitter_ns > 0) {
            turnaround_ns = rng.normal(turnaround_ns, cfg.processing_delay_jitter_ns);
        }
        turnaround_ns = std::max(0.0, turnaround_ns);

        const std::int64_t rtt_ticks = detail::round_to_ticks(rtt_ns * 1000.0, tick);
        const std::int64_t outbound_ticks = rtt_ticks / 2;
        const std::int64_t inbound_ticks = rtt_ticks - outbound_ticks;
        const std::int64_t turnaround_ticks = detail::round_to_ticks(turnaround_ns * 1000.0, tick);

        // Ideal-timeline events, all multiples of the tick.
        const std::int64_t departure = static_cast<std::int64_t>(k) * frame_spacing_ps;
        const std::int64_t arrival = departure + outbound_ticks * tick;
        const std::int64_t reply = arrival + turnaround_ticks * tick;
        const std::int64_t reply_arrival = reply + inbound_ticks * tick;

        FtmFrame frame;
        frame.timestamps = TimestampQuad{departure + initiator_offset, arrival + responder_offset,
                                         reply + responder_offset, reply_arrival + initiator_offset};
        frame.rtt_ns = rtt_from_timestamps(frame.timestamps->t1_ps, frame.timestamps->t2_ps,
                                           frame.timestamps->t3_ps, frame.timestamps->t4_ps);
        frame.rssi_dbm = noise.rssi_sigma_db > 0 ? rng.normal(noise.rssi_mean_dbm, noise.rssi_sigma_db)
                                                 : noise.rssi_mean_dbm;
        rtt_sum_ns += frame.rtt_ns;
        m.frames.push_back(frame);
    }
    m.rtt_raw_ns = rtt_sum_ns / static_cast<double>(cfg.frames_per_burst);
    return m;
}

/// Seeded convenience overload: the burst owns its stream.
inline FtmMeasurement simulate_exchange(double true_distance_m, const ExchangeConfig& cfg,
                                        const NoiseModel& noise) {
    Rng rng(cfg.rng_seed);
    return simulate_exchange(true_distance_m, cfg, noise, rng);
}

}  // namespace ftm
