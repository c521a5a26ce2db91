#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ftm/core.hpp"
#include "ftm/errors.hpp"

namespace ftm {

/// One (estimator, measurement) evaluation outcome.
struct ErrorRecord {
    std::string estimator_name;
    double true_distance_m = 0.0;
    double estimated_distance_m = 0.0;
    double abs_error_m = 0.0;
    Scenario scenario = Scenario::Synthetic;
    Bandwidth bandwidth = Bandwidth::MHz40;
};

inline ErrorRecord make_error_record(std::string estimator, double truth_m, double estimate_m,
                                     Scenario scenario, Bandwidth bw) {
    return {std::move(estimator), truth_m, estimate_m, std::abs(estimate_m - truth_m), scenario, bw};
}

/// Right-continuous empirical CDF; ties counted with <=.
struct EcdfCurve {
    std::vector<double> sorted_errors;
    std::vector<double> cumulative;

    /// F(x) = (#errors <= x) / n.
    double value_at(double x) const {
        const auto count =
            std::upper_bound(sorted_errors.begin(), sorted_errors.end(), x) - sorted_errors.begin();
        return static_cast<double>(count) / static_cast<double>(sorted_errors.size());
    }

    /// Smallest error e with F(e) >= p (order statistic).
    double quantile(double p) const {
        const auto n = sorted_errors.size();
        std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        if (rank == 0) rank = 1;
        if (rank > n) rank = n;
        return sorted_errors[rank - 1];
    }
};

inline EcdfCurve ecdf(std::vector<double> errors) {
    if (errors.empty()) throw Error(ErrorCode::EmptyInput, "ecdf of empty sample");
    std::sort(errors.begin(), errors.end());
    EcdfCurve curve;
    curve.cumulative.reserve(errors.size());
    const auto n = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        curve.cumulative.push_back(static_cast<double>(i + 1) / n);
    }
    curve.sorted_errors = std::move(errors);
    return curve;
}

inline double percentile_below(const EcdfCurve& curve, double threshold_m) {
    return curve.value_at(threshold_m);
}

struct EstimatorStats {
    std::string name;
    std::size_t count = 0;
    double mean_m = 0.0;
    double median_m = 0.0;
    double p75_m = 0.0;
    double p90_m = 0.0;
    EcdfCurve curve;
};

/// Per-estimator error statistics plus full ECDF curves, ordered by
/// estimator name so regenerated reports are byte-identical.
struct ComparisonReport {
    std::vector<EstimatorStats> estimators;

    const EstimatorStats* find(const std::string& name) const {
        for (const auto& e : estimators)
            if (e.name == name) return &e;
        return nullptr;
    }
};

inline ComparisonReport compare(const std::vector<ErrorRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no error records");
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) groups[r.estimator_name].push_back(r.abs_error_m);

    ComparisonReport report;
    for (auto& [name, errors] : groups) {
        EstimatorStats s;
        s.name = name;
        s.count = errors.size();
        double sum = 0.0;
        for (double e : errors) sum += e;
        s.mean_m = sum / static_cast<double>(errors.size());
        s.curve = ecdf(std::move(errors));
        s.median_m = s.curve.quantile(0.50);
        s.p75_m = s.curve.quantile(0.75);
        s.p90_m = s.curve.quantile(0.90);
        report.estimators.push_back(std::move(s));
    }
    return report;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

/// CSV body of the comparison report; stable column order, estimators
/// sorted by name, fixed precision, so identical inputs yield identical
/// bytes.
inline std::string format_comparison_csv(const ComparisonReport& report) {
    std::string out = "estimator,count,mean_m,median_m,p75_m,p90_m\n";
    for (const auto& e : report.estimators) {
        out += e.name + ',' + std::to_string(e.count) + ',' + detail::fixed(e.mean_m, 4) + ',' +
               detail::fixed(e.median_m, 4) + ',' + detail::fixed(e.p75_m, 4) + ',' +
               detail::fixed(e.p90_m, 4) + '\n';
    }
    return out;
}

inline std::string format_comparison_table(const ComparisonReport& report) {
    char line[160];
    std::string out;
    std::snprintf(line, sizeof(line), "%-16s %8s %10s %10s %10s %10s\n", "estimator", "count",
                  "mean[m]", "median[m]", "p75[m]", "p90[m]");
    out += line;
    for (const auto& e : report.estimators) {
        std::snprintf(line, sizeof(line), "%-16s %8zu %10.4f %10.4f %10.4f %10.4f\n", e.name.c_str(),
                      e.count, e.mean_m, e.median_m, e.p75_m, e.p90_m);
        out += line;
    }
    return out;
}

/// Two-column ECDF file body: error_m,cumulative_fraction.
inline std::string format_ecdf_csv(const EcdfCurve& curve) {
    std::string out = "error_m,cumulative_fraction\n";
    for (std::size_t i = 0; i < curve.sorted_errors.size(); ++i) {
        out += detail::fixed(curve.sorted_errors[i], 4) + ',' + detail::fixed(curve.cumulative[i], 6) +
               '\n';
    }
    return out;
}

/// RSSI mean/std grouped by ground-truth distance rounded to 0.1 m.
struct RssiProfileRow {
    double distance_m = 0.0;
    std::size_t count = 0;
    double mean_rssi_dbm = 0.0;
    double std_rssi_db = 0.0;
};

inline std::vector<RssiProfileRow> rssi_profile(const Dataset& ds) {
    std::map<long, std::vector<double>> bins;  // key: distance in 0.1 m steps
    for (const auto& m : ds.measurements) {
        if (!m.true_distance_m) {
            throw Error(ErrorCode::NoGroundTruth, "rssi_profile needs true_distance on every row");
        }
        if (m.frames.empty()) continue;
        bins[std::lround(*m.true_distance_m * 10.0)].push_back(mean_frame_rssi_dbm(m));
    }
    std::vector<RssiProfileRow> rows;
    rows.reserve(bins.size());
    for (const auto& [key, values] : bins) {
        RssiProfileRow row;
        row.distance_m = static_cast<double>(key) / 10.0;
        row.count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean_rssi_dbm = sum / static_cast<double>(values.size());
        double sq = 0.0;
        for (double v : values) sq += (v - row.mean_rssi_dbm) * (v - row.mean_rssi_dbm);
        row.std_rssi_db =
            values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

inline std::string format_rssi_profile_csv(const std::vector<RssiProfileRow>& rows) {
    std::string out = "true_distance_m,count,mean_rssi_dbm,std_rssi_db\n";
    for (const auto& r : rows) {
        out += detail::fixed(r.distance_m, 1) + ',' + std::to_string(r.count) + ',' +
               detail::fixed(r.mean_rssi_dbm, 2) + ',' + detail::fixed(r.std_rssi_db, 2) + '\n';
    }
    return out;
}

}  // namespace ftm
