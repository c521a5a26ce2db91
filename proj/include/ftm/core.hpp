#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftm/errors.hpp"

namespace ftm {

/// Tolerance absorbing vendor rounding when cross-checking averaged and
/// per-frame RTT values (ns).
inline constexpr double kRttToleranceNs = 0.5;

enum class Bandwidth { MHz20, MHz40 };

inline int bandwidth_mhz(Bandwidth b) { return b == Bandwidth::MHz20 ? 20 : 40; }

enum class Scenario { Indoor, Outdoor, Test, Synthetic };

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Indoor: return "indoor";
        case Scenario::Outdoor: return "outdoor";
        case Scenario::Test: return "test";
        case Scenario::Synthetic: return "synthetic";
    }
    return "synthetic";
}

/// FTM timestamp quadruple in picoseconds. t1/t4 are stamped by the
/// initiating device, t2/t3 by the responder; the two clocks share no
/// epoch, so only within-device ordering (t4 >= t1, t3 >= t2) is
/// meaningful.
struct TimestampQuad {
    std::int64_t t1_ps = 0;
    std::int64_t t2_ps = 0;
    std::int64_t t3_ps = 0;
    std::int64_t t4_ps = 0;

    bool operator==(const TimestampQuad&) const = default;
};

/// One ranging frame inside an FTM burst.
struct FtmFrame {
    double rssi_dbm = 0.0;
    double rtt_ns = 0.0;
    std::optional<TimestampQuad> timestamps;

    bool operator==(const FtmFrame&) const = default;
};

/// One FTM burst: the averaged RTT plus the vendor's own estimates when
/// the log carried them.
struct FtmMeasurement {
    std::string anchor_id;
    double rtt_raw_ns = 0.0;
    std::optional<double> rtt_est_ns;
    std::optional<double> dist_est_m;
    std::optional<double> own_est_m;
    int num_frames = 0;
    std::vector<FtmFrame> frames;
    Bandwidth bandwidth = Bandwidth::MHz40;
    std::optional<double> true_distance_m;

    bool operator==(const FtmMeasurement&) const = default;
};

/// Feature pair (rtt_raw, mean frame RSSI) with ground truth; the unit of
/// estimator training.
struct LabeledSample {
    double rtt_raw_ns = 0.0;
    double mean_rssi_dbm = 0.0;
    double true_distance_m = 0.0;

    bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
    std::string name;
    Scenario scenario = Scenario::Synthetic;
    std::vector<FtmMeasurement> measurements;

    bool operator==(const Dataset&) const = default;
};

enum class ViolationKind {
    FrameCountMismatch,
    RttRawNotMean,
    FrameRttMismatch,
    TimestampOrder,
    NegativeDistance,
};

inline const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::FrameCountMismatch: return "FrameCountMismatch";
        case ViolationKind::RttRawNotMean: return "RttRawNotMean";
        case ViolationKind::FrameRttMismatch: return "FrameRttMismatch";
        case ViolationKind::TimestampOrder: return "TimestampOrder";
        case ViolationKind::NegativeDistance: return "NegativeDistance";
    }
    return "Unknown";
}

/// One invariant violation; frame_index is -1 for measurement-level checks.
struct Violation {
    ViolationKind kind;
    int frame_index = -1;
    std::string detail;
};

inline double mean_frame_rtt_ns(const FtmMeasurement& m) {
    double sum = 0.0;
    for (const auto& f : m.frames) sum += f.rtt_ns;
    return sum / static_cast<double>(m.frames.size());
}

inline double mean_frame_rssi_dbm(const FtmMeasurement& m) {
    double sum = 0.0;
    for (const auto& f : m.frames) sum += f.rssi_dbm;
    return sum / static_cast<double>(m.frames.size());
}

/// Checks every record invariant; violations are data, not errors, so the
/// result is a (possibly empty) list rather than an exception.
inline std::vector<Violation> validate_measurement(const FtmMeasurement& m) {
    std::vector<Violation> out;

    if (m.num_frames != static_cast<int>(m.frames.size())) {
        out.push_back({ViolationKind::FrameCountMismatch, -1,
                       "num_frames=" + std::to_string(m.num_frames) + " but " +
                           std::to_string(m.frames.size()) + " frames present"});
    }

    if (!m.frames.empty()) {
        const double mean = mean_frame_rtt_ns(m);
        if (std::abs(m.rtt_raw_ns - mean) > kRttToleranceNs) {
            out.push_back({ViolationKind::RttRawNotMean, -1,
                           "rtt_raw=" + std::to_string(m.rtt_raw_ns) + " ns vs frame mean " +
                               std::to_string(mean) + " ns"});
        }
    }

    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        const auto& f = m.frames[i];
        if (!f.timestamps) continue;
        const auto& ts = *f.timestamps;
        // Within-device ordering only: t1/t4 share the initiator clock,
        // t2/t3 the responder clock.
        if (ts.t4_ps < ts.t1_ps || ts.t3_ps < ts.t2_ps) {
            out.push_back({ViolationKind::TimestampOrder, static_cast<int>(i),
                           "t4 < t1 or t3 < t2"});
            continue;
        }
        const double rtt_from_ts =
            static_cast<double>((ts.t4_ps - ts.t1_ps) - (ts.t3_ps - ts.t2_ps)) / 1000.0;
        if (std::abs(rtt_from_ts - f.rtt_ns) > kRttToleranceNs) {
            out.push_back({ViolationKind::FrameRttMismatch, static_cast<int>(i),
                           "stored rtt " + std::to_string(f.rtt_ns) + " ns vs timestamps " +
                               std::to_string(rtt_from_ts) + " ns"});
        }
    }

    const auto check_nonnegative = [&](const std::optional<double>& v, const char* field) {
        if (v && *v < 0.0) {
            out.push_back({ViolationKind::NegativeDistance, -1,
                           std::string(field) + "=" + std::to_string(*v)});
        }
    };
    check_nonnegative(m.dist_est_m, "dist_est_m");
    check_nonnegative(m.own_est_m, "own_est_m");
    check_nonnegative(m.true_distance_m, "true_distance_m");

    return out;
}

/// Extracts the training features from a measurement. Deterministic and
/// invariant to frame order.
inline LabeledSample to_labeled_sample(const FtmMeasurement& m) {
    if (m.frames.empty()) {
        throw Error(ErrorCode::NoFrames, "measurement has no frames");
    }
    if (!m.true_distance_m) {
        throw Error(ErrorCode::NoGroundTruth, "measurement has no true_distance");
    }
    return LabeledSample{m.rtt_raw_ns, mean_frame_rssi_dbm(m), *m.true_distance_m};
}

/// Labeled samples for every measurement that carries ground truth and at
/// least one frame; others are skipped.
inline std::vector<LabeledSample> labeled_samples(const Dataset& d) {
    std::vector<LabeledSample> out;
    out.reserve(d.measurements.size());
    for (const auto& m : d.measurements) {
        if (m.frames.empty() || !m.true_distance_m) continue;
        out.push_back(to_labeled_sample(m));
    }
    return out;
}

}  // namespace ftm
