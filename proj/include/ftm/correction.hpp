#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ftm/errors.hpp"

namespace ftm {

inline constexpr double kSpeedOfLightMps = 299'792'458.0;

/// Eq.-style RTT-to-distance conversion: d = rtt * c / 2. Negative input
/// yields negative output; clamping is the caller's decision.
inline double distance_from_rtt(double rtt_ns) {
    return rtt_ns * 1e-9 * kSpeedOfLightMps * 0.5;
}

/// Inverse of distance_from_rtt.
inline double rtt_from_distance(double distance_m) {
    return 2.0 * distance_m / kSpeedOfLightMps * 1e9;
}

/// Piecewise-linear map over RTT (ns), mirroring the three-segment
/// correction the ESP32-S2 firmware applies to rtt_raw. A value exactly at
/// a breakpoint belongs to the segment on its right.
struct PiecewiseLinearMap {
    struct Segment {
        double slope = 1.0;
        double intercept_ns = 0.0;

        bool operator==(const Segment&) const = default;
    };

    std::vector<double> breakpoints_ns;  // strictly increasing
    std::vector<Segment> segments;       // breakpoints_ns.size() + 1 entries

    bool operator==(const PiecewiseLinearMap&) const = default;

    static PiecewiseLinearMap identity(std::vector<double> breakpoints = {10.0, 124.0}) {
        PiecewiseLinearMap m;
        m.segments.assign(breakpoints.size() + 1, Segment{});
        m.breakpoints_ns = std::move(breakpoints);
        return m;
    }

    void check() const {
        if (segments.size() != breakpoints_ns.size() + 1) {
            throw Error(ErrorCode::InvalidArgument,
                        "segment count must be breakpoint count + 1");
        }
        for (std::size_t i = 1; i < breakpoints_ns.size(); ++i) {
            if (!(breakpoints_ns[i - 1] < breakpoints_ns[i])) {
                throw Error(ErrorCode::InvalidArgument, "breakpoints must be strictly increasing");
            }
        }
    }

    std::size_t segment_index(double rtt_ns) const {
        // Count of breakpoints <= rtt: left-closed intervals on the right side.
        return static_cast<std::size_t>(
            std::upper_bound(breakpoints_ns.begin(), breakpoints_ns.end(), rtt_ns) -
            breakpoints_ns.begin());
    }
};

inline double apply_vendor_correction(double rtt_raw_ns, const PiecewiseLinearMap& map) {
    map.check();
    const auto& seg = map.segments[map.segment_index(rtt_raw_ns)];
    return seg.slope * rtt_raw_ns + seg.intercept_ns;
}

/// (rtt_raw, rtt_est) observation used to recover the vendor correction.
struct RttPair {
    double raw_ns = 0.0;
    double est_ns = 0.0;
};

struct SegmentedFit {
    PiecewiseLinearMap map;
    std::vector<double> segment_rmse_ns;  // one per segment
    double total_rmse_ns = 0.0;
};

namespace detail {

/// Ordinary least squares for y = a*x + b. Degenerate x spread falls back
/// to a flat segment through the mean.
inline PiecewiseLinearMap::Segment ols_line(const std::vector<RttPair>& pts) {
    const auto n = static_cast<double>(pts.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& p : pts) {
        mean_x += p.raw_ns;
        mean_y += p.est_ns;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : pts) {
        sxx += (p.raw_ns - mean_x) * (p.raw_ns - mean_x);
        sxy += (p.raw_ns - mean_x) * (p.est_ns - mean_y);
    }
    if (sxx == 0.0) return {0.0, mean_y};
    const double slope = sxy / sxx;
    return {slope, mean_y - slope * mean_x};
}

}  // namespace detail

/// Per-segment ordinary least squares against fixed breakpoints.
inline SegmentedFit fit_segmented(const std::vector<RttPair>& pairs,
                                  const std::vector<double>& breakpoints_ns) {
    PiecewiseLinearMap map;
    map.breakpoints_ns = breakpoints_ns;
    map.segments.assign(breakpoints_ns.size() + 1, {});
    map.check();

    std::vector<std::vector<RttPair>> buckets(map.segments.size());
    for (const auto& p : pairs) buckets[map.segment_index(p.raw_ns)].push_back(p);

    SegmentedFit fit;
    fit.segment_rmse_ns.resize(map.segments.size(), 0.0);
    double total_sse = 0.0;
    for (std::size_t s = 0; s < buckets.size(); ++s) {
        if (buckets[s].size() < 2) {
            throw Error(ErrorCode::InsufficientPointsInSegment,
                        "segment " + std::to_string(s) + " holds " +
                            std::to_string(buckets[s].size()) + " points, need >= 2",
                        static_cast<long>(s));
        }
        map.segments[s] = detail::ols_line(buckets[s]);
        double sse = 0.0;
        for (const auto& p : buckets[s]) {
            const double r = p.est_ns - (map.segments[s].slope * p.raw_ns + map.segments[s].intercept_ns);
            sse += r * r;
        }
        fit.segment_rmse_ns[s] = std::sqrt(sse / static_cast<double>(buckets[s].size()));
        total_sse += sse;
    }
    fit.map = std::move(map);
    fit.total_rmse_ns = std::sqrt(total_sse / static_cast<double>(pairs.size()));
    return fit;
}

namespace detail {

/// Prefix sums over the raw-sorted pairs giving any contiguous segment's
/// OLS residual in O(1); the cut search below leans on this to stay
/// exhaustive.
struct SegmentSums {
    std::vector<double> sx, sy, sxx, sxy, syy;  // size n+1

    explicit SegmentSums(const std::vector<RttPair>& sorted_pairs) {
        const std::size_t n = sorted_pairs.size();
        sx.assign(n + 1, 0.0);
        sy.assign(n + 1, 0.0);
        sxx.assign(n + 1, 0.0);
        sxy.assign(n + 1, 0.0);
        syy.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = sorted_pairs[i].raw_ns;
            const double y = sorted_pairs[i].est_ns;
            sx[i + 1] = sx[i] + x;
            sy[i + 1] = sy[i] + y;
            sxx[i + 1] = sxx[i] + x * x;
            sxy[i + 1] = sxy[i] + x * y;
            syy[i + 1] = syy[i] + y * y;
        }
    }

    /// OLS residual SSE over [begin, end), infinity for segments of < 2 points.
    double sse(std::size_t begin, std::size_t end) const {
        if (end - begin < 2) return std::numeric_limits<double>::infinity();
        const auto n = static_cast<double>(end - begin);
        const double dsx = sx[end] - sx[begin];
        const double dsy = sy[end] - sy[begin];
        const double vxx = (sxx[end] - sxx[begin]) - dsx * dsx / n;
        const double vxy = (sxy[end] - sxy[begin]) - dsx * dsy / n;
        const double vyy = (syy[end] - syy[begin]) - dsy * dsy / n;
        const double residual = vxx <= 0.0 ? vyy : vyy - vxy * vxy / vxx;
        return std::max(0.0, residual);
    }
};

inline double segmented_sse(const SegmentSums& sums, const std::vector<std::size_t>& cuts,
                            std::size_t total) {
    double out = 0.0;
    std::size_t begin = 0;
    for (std::size_t s = 0; s <= cuts.size(); ++s) {
        const std::size_t end = (s < cuts.size()) ? cuts[s] : total;
        const double part = sums.sse(begin, end);
        if (!std::isfinite(part)) return part;
        out += part;
        begin = end;
    }
    return out;
}

/// Convenience wrapper used by tests.
inline double segmented_sse(const std::vector<RttPair>& sorted_pairs,
                            const std::vector<std::size_t>& cuts) {
    return segmented_sse(SegmentSums(sorted_pairs), cuts, sorted_pairs.size());
}

}  // namespace detail

/// Breakpoint recovery by grid search over cut positions (midpoints
/// between consecutive distinct raw values), minimizing the total
/// segmented-fit SSE. Prefix sums make each candidate O(k), so the search
/// enumerates every combination when the per-dimension candidate count
/// fits a ~5M-combination budget; denser inputs are subsampled evenly and
/// then re-searched exhaustively around the winner. Ties within 1e-9
/// relative resolve to the first candidate visited, i.e. the
/// lexicographically smallest breakpoint tuple.
inline std::vector<double> detect_breakpoints(const std::vector<RttPair>& pairs, int k_segments) {
    if (k_segments < 2) {
        throw Error(ErrorCode::InvalidArgument, "segment count must be >= 2");
    }
    if (pairs.size() < static_cast<std::size_t>(10 * k_segments)) {
        throw Error(ErrorCode::InsufficientData,
                    "need at least " + std::to_string(10 * k_segments) + " points");
    }

    std::vector<RttPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end(), [](const RttPair& a, const RttPair& b) {
        return a.raw_ns < b.raw_ns || (a.raw_ns == b.raw_ns && a.est_ns < b.est_ns);
    });

    // Cut position i puts a breakpoint between sorted[i-1] and sorted[i].
    std::vector<std::size_t> cut_positions;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].raw_ns > sorted[i - 1].raw_ns) cut_positions.push_back(i);
    }
    const int cuts_needed = k_segments - 1;
    if (static_cast<int>(cut_positions.size()) < cuts_needed) {
        throw Error(ErrorCode::InsufficientData, "too few distinct raw values");
    }

    const detail::SegmentSums sums(sorted);
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_cuts;
    std::vector<std::size_t> current(static_cast<std::size_t>(cuts_needed));

    const auto search = [&](const std::vector<std::size_t>& candidates) {
        const auto recurse = [&](auto&& self, int depth, std::size_t start) -> void {
            if (depth == cuts_needed) {
                const double sse = detail::segmented_sse(sums, current, sorted.size());
                if (sse < best_sse * (1.0 - 1e-9) || (best_cuts.empty() && sse < best_sse)) {
                    best_sse = sse;
                    best_cuts = current;
                }
                return;
            }
            for (std::size_t c = start; c < candidates.size(); ++c) {
                current[static_cast<std::size_t>(depth)] = candidates[c];
                self(self, depth + 1, c + 1);
            }
        };
        recurse(recurse, 0, 0);
    };

    const double budget = 5e6;
    const auto per_dim_cap = static_cast<std::size_t>(std::max(
        64.0, std::floor(std::pow(budget, 1.0 / static_cast<double>(cuts_needed)))));
    if (cut_positions.size() <= per_dim_cap) {
        search(cut_positions);
    } else {
        std::vector<std::size_t> coarse;
        const double step = static_cast<double>(cut_positions.size() - 1) /
                            static_cast<double>(per_dim_cap - 1);
        for (std::size_t i = 0; i < per_dim_cap; ++i) {
            coarse.push_back(cut_positions[static_cast<std::size_t>(std::llround(i * step))]);
        }
        coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
        search(coarse);

        // Second pass over every exact cut position within one coarse step
        // of the winner, per breakpoint.
        std::vector<std::size_t> fine;
        for (std::size_t chosen : best_cuts) {
            const auto it = std::lower_bound(cut_positions.begin(), cut_positions.end(), chosen);
            const auto center = static_cast<std::size_t>(it - cut_positions.begin());
            const auto radius = static_cast<std::size_t>(std::ceil(step)) + 1;
            const std::size_t lo = center > radius ? center - radius : 0;
            const std::size_t hi = std::min(cut_positions.size(), center + radius + 1);
            for (std::size_t i = lo; i < hi; ++i) fine.push_back(cut_positions[i]);
        }
        std::sort(fine.begin(), fine.end());
        fine.erase(std::unique(fine.begin(), fine.end()), fine.end());
        best_sse = std::numeric_limits<double>::infinity();
        best_cuts.clear();
        search(fine);
    }

    if (best_cuts.empty()) {
        throw Error(ErrorCode::InsufficientData, "no cut placement leaves >= 2 points per segment");
    }
    std::vector<double> breakpoints;
    breakpoints.reserve(best_cuts.size());
    for (std::size_t cut : best_cuts) {
        breakpoints.push_back(0.5 * (sorted[cut - 1].raw_ns + sorted[cut].raw_ns));
    }
    return breakpoints;
}

}  // namespace ftm
