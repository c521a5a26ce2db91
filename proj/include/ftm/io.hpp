#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ftm/channel.hpp"
#include "ftm/core.hpp"
#include "ftm/correction.hpp"
#include "ftm/errors.hpp"
#include "ftm/ml/cross_validation.hpp"
#include "ftm/ml/split.hpp"

namespace ftm::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset file format v1 (text, columnar; see docs/dataset_format.md).
//
// Canonical encoding: fixed column order, RTT values at 3 decimals (ns),
// distances at 3 decimals (m), RSSI at 2 decimals (dBm), timestamps as
// integer picoseconds, rows in (measurement, frame) order. Identical
// datasets serialize byte-identically; values are quantized to the stated
// precision on write.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kDatasetHeaderLine = "ftm-dataset,v1";
inline constexpr std::string_view kMeasurementColumns =
    "columns.measurement,anchor_id,rtt_raw_ns,rtt_est_ns,dist_est_m,own_est_m,num_frames,"
    "true_distance_m";
inline constexpr std::string_view kFrameColumns =
    "columns.frame,rssi_dbm,rtt_ns,t1_ps,t2_ps,t3_ps,t4_ps";

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string opt_fixed(const std::optional<double>& v, int decimals) {
    return v ? fixed(*v, decimals) : std::string();
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline double parse_double(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'", line_no);
    }
}

inline std::int64_t parse_i64(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'", line_no);
    }
}

inline std::optional<double> parse_opt_double(const std::string& s, int line_no, const char* what) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, line_no, what);
}

inline Scenario parse_scenario(const std::string& s, int line_no) {
    if (s == "indoor") return Scenario::Indoor;
    if (s == "outdoor") return Scenario::Outdoor;
    if (s == "test") return Scenario::Test;
    if (s == "synthetic") return Scenario::Synthetic;
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad scenario '" + s + "'",
                line_no);
}

}  // namespace detail

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    Bandwidth bw = Bandwidth::MHz20;
    if (!ds.measurements.empty()) {
        bw = ds.measurements.front().bandwidth;
        for (const auto& m : ds.measurements) {
            if (m.bandwidth != bw) {
                throw Error(ErrorCode::InvalidArgument,
                            "dataset file v1 carries one bandwidth; split mixed datasets first");
            }
        }
    }
    if (ds.name.find(',') != std::string::npos || ds.name.find('\n') != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "dataset name must not contain ',' or newline");
    }

    std::ostringstream out;
    out << kDatasetHeaderLine << "\n";
    out << "name," << ds.name << "\n";
    out << "scenario," << scenario_name(ds.scenario) << "\n";
    out << "bandwidth_mhz," << bandwidth_mhz(bw) << "\n";
    out << "units,rtt=ns;dist=m;rssi=dBm;t=ps\n";
    out << "measurements," << ds.measurements.size() << "\n";
    out << kMeasurementColumns << "\n";
    out << kFrameColumns << "\n";
    for (const auto& m : ds.measurements) {
        if (m.anchor_id.find(',') != std::string::npos || m.anchor_id.find('\n') != std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "anchor_id must not contain ',' or newline");
        }
        out << "M," << m.anchor_id << ',' << detail::fixed(m.rtt_raw_ns, 3) << ','
            << detail::opt_fixed(m.rtt_est_ns, 3) << ',' << detail::opt_fixed(m.dist_est_m, 3) << ','
            << detail::opt_fixed(m.own_est_m, 3) << ',' << m.num_frames << ','
            << detail::opt_fixed(m.true_distance_m, 3) << "\n";
        for (const auto& f : m.frames) {
            out << "F," << detail::fixed(f.rssi_dbm, 2) << ',' << detail::fixed(f.rtt_ns, 3) << ',';
            if (f.timestamps) {
                out << f.timestamps->t1_ps << ',' << f.timestamps->t2_ps << ','
                    << f.timestamps->t3_ps << ',' << f.timestamps->t4_ps;
            } else {
                out << ",,,";
            }
            out << "\n";
        }
    }

    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    const std::string text = out.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

struct ReadResult {
    Dataset dataset;
    std::vector<std::string> warnings;
};

/// Parses and validates a v1 dataset file. Validation failures throw in
/// strict mode (line number in Error::detail) and become warnings when
/// lenient; parse errors always throw.
inline ReadResult read_dataset_file(const std::filesystem::path& path, bool lenient = false) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());

    ReadResult result;
    Dataset& ds = result.dataset;
    std::string line;
    int line_no = 0;
    Bandwidth bw = Bandwidth::MHz20;
    std::size_t declared = 0;

    const auto next_line = [&]() -> bool {
        if (!std::getline(file, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        return true;
    };
    const auto expect_header = [&](std::string_view literal) {
        if (!next_line() || line != literal) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected '" + std::string(literal) + "'",
                        line_no);
        }
    };
    const auto header_value = [&](std::string_view key) {
        if (!next_line()) {
            throw Error(ErrorCode::ParseError, "unexpected end of header", line_no);
        }
        const auto fields = detail::split_csv(line);
        if (fields.size() != 2 || fields[0] != key) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": expected '" + std::string(key) + ",...'",
                        line_no);
        }
        return fields[1];
    };

    if (!next_line()) throw Error(ErrorCode::ParseError, "empty file", 1);
    if (line != kDatasetHeaderLine) {
        const auto fields = detail::split_csv(line);
        if (fields.size() == 2 && fields[0] == "ftm-dataset") {
            throw Error(ErrorCode::UnsupportedVersion, "dataset format '" + fields[1] + "'", line_no);
        }
        throw Error(ErrorCode::ParseError, "line 1: not a dataset file", 1);
    }
    ds.name = header_value("name");
    ds.scenario = detail::parse_scenario(header_value("scenario"), line_no);
    const std::string bw_text = header_value("bandwidth_mhz");
    if (bw_text == "20") {
        bw = Bandwidth::MHz20;
    } else if (bw_text == "40") {
        bw = Bandwidth::MHz40;
    } else {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bandwidth_mhz must be 20 or 40", line_no);
    }
    header_value("units");
    declared = static_cast<std::size_t>(detail::parse_i64(header_value("measurements"), line_no,
                                                          "measurement count"));
    expect_header(kMeasurementColumns);
    expect_header(kFrameColumns);

    int current_line = 0;  // line of the measurement row being built
    FtmMeasurement current;
    bool has_current = false;

    const auto finish_current = [&]() {
        if (!has_current) return;
        const auto violations = validate_measurement(current);
        for (const auto& v : violations) {
            const std::string msg = "line " + std::to_string(current_line) + ": " +
                                    violation_name(v.kind) + " (" + v.detail + ")";
            if (lenient) {
                result.warnings.push_back(msg);
            } else {
                throw Error(ErrorCode::ValidationFailed, msg, current_line);
            }
        }
        ds.measurements.push_back(std::move(current));
        current = {};
        has_current = false;
    };

    while (next_line()) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields[0] == "M") {
            finish_current();
            if (fields.size() != 8) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": measurement row needs 8 fields",
                            line_no);
            }
            current_line = line_no;
            current.anchor_id = fields[1];
            current.rtt_raw_ns = detail::parse_double(fields[2], line_no, "rtt_raw_ns");
            current.rtt_est_ns = detail::parse_opt_double(fields[3], line_no, "rtt_est_ns");
            current.dist_est_m = detail::parse_opt_double(fields[4], line_no, "dist_est_m");
            current.own_est_m = detail::parse_opt_double(fields[5], line_no, "own_est_m");
            current.num_frames =
                static_cast<int>(detail::parse_i64(fields[6], line_no, "num_frames"));
            current.true_distance_m = detail::parse_opt_double(fields[7], line_no, "true_distance_m");
            current.bandwidth = bw;
            has_current = true;
        } else if (fields[0] == "F") {
            if (!has_current) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": frame row before any measurement",
                            line_no);
            }
            if (fields.size() != 7) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": frame row needs 7 fields", line_no);
            }
            FtmFrame f;
            f.rssi_dbm = detail::parse_double(fields[1], line_no, "rssi_dbm");
            f.rtt_ns = detail::parse_double(fields[2], line_no, "rtt_ns");
            const bool any_ts = !fields[3].empty() || !fields[4].empty() || !fields[5].empty() ||
                                !fields[6].empty();
            if (any_ts) {
                f.timestamps = TimestampQuad{detail::parse_i64(fields[3], line_no, "t1_ps"),
                                             detail::parse_i64(fields[4], line_no, "t2_ps"),
                                             detail::parse_i64(fields[5], line_no, "t3_ps"),
                                             detail::parse_i64(fields[6], line_no, "t4_ps")};
            }
            current.frames.push_back(f);
        } else {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": unknown row tag '" + fields[0] + "'",
                        line_no);
        }
    }
    finish_current();

    if (ds.measurements.size() != declared) {
        const std::string msg = "declared " + std::to_string(declared) + " measurements, found " +
                                std::to_string(ds.measurements.size());
        if (lenient) {
            result.warnings.push_back(msg);
        } else {
            throw Error(ErrorCode::ParseError, msg, line_no);
        }
    }
    if (ds.measurements.empty()) result.warnings.push_back("empty measurement section");
    return result;
}

inline Dataset read_dataset(const std::filesystem::path& path) {
    return read_dataset_file(path, false).dataset;
}

// ---------------------------------------------------------------------------
// JSON config carriers (correction maps, channel presets, experiments).
// ---------------------------------------------------------------------------

inline json to_json(const PiecewiseLinearMap& map) {
    json segments = json::array();
    for (const auto& s : map.segments) {
        segments.push_back({{"slope", s.slope}, {"intercept_ns", s.intercept_ns}});
    }
    return {{"breakpoints_ns", map.breakpoints_ns}, {"segments", segments}};
}

inline PiecewiseLinearMap piecewise_map_from_json(const json& j) {
    PiecewiseLinearMap map;
    map.breakpoints_ns = j.at("breakpoints_ns").get<std::vector<double>>();
    for (const auto& s : j.at("segments")) {
        map.segments.push_back({s.at("slope").get<double>(), s.at("intercept_ns").get<double>()});
    }
    map.check();
    return map;
}

inline void save_correction_map(const PiecewiseLinearMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << to_json(map).dump(2) << "\n";
}

inline PiecewiseLinearMap load_correction_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return piecewise_map_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

inline json to_json(const ChannelModel& ch) {
    return {{"pathloss_exponent", ch.pathloss_exponent},
            {"pl0_dbm", ch.pl0_dbm},
            {"shadowing_sigma_db", ch.shadowing_sigma_db},
            {"rtt_noise_sigma_ns", ch.rtt_noise_sigma_ns},
            {"nlos_probability", ch.nlos_probability},
            {"nlos_excess_mean_ns", ch.nlos_excess_mean_ns},
            {"rng_seed", ch.rng_seed}};
}

inline ChannelModel channel_from_json(const json& j) {
    ChannelModel ch;
    ch.pathloss_exponent = j.value("pathloss_exponent", ch.pathloss_exponent);
    ch.pl0_dbm = j.value("pl0_dbm", ch.pl0_dbm);
    ch.shadowing_sigma_db = j.value("shadowing_sigma_db", ch.shadowing_sigma_db);
    ch.rtt_noise_sigma_ns = j.value("rtt_noise_sigma_ns", ch.rtt_noise_sigma_ns);
    ch.nlos_probability = j.value("nlos_probability", ch.nlos_probability);
    ch.nlos_excess_mean_ns = j.value("nlos_excess_mean_ns", ch.nlos_excess_mean_ns);
    ch.rng_seed = j.value("rng_seed", ch.rng_seed);
    ch.check();
    return ch;
}

inline json to_json(const Point& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

inline Point point_from_json(const json& j) {
    return {j.value("x", 0.0), j.value("y", 0.0), j.value("z", 0.0)};
}

inline json to_json(const ScenarioSpec& spec) {
    json anchors = json::array();
    for (const auto& p : spec.anchor_positions) anchors.push_back(to_json(p));
    json tags = json::array();
    for (const auto& p : spec.tag_positions) tags.push_back(to_json(p));
    json j{{"name", spec.name},
           {"scenario", scenario_name(spec.scenario)},
           {"anchor_positions", anchors},
           {"tag_positions", tags},
           {"bandwidth_mhz", bandwidth_mhz(spec.bandwidth)},
           {"dwell", spec.dwell},
           {"channel", to_json(spec.channel)},
           {"exchange",
            {{"frames_per_burst", spec.exchange.frames_per_burst},
             {"clock_resolution_ps", spec.exchange.clock_resolution_ps},
             {"processing_delay_mean_ns", spec.exchange.processing_delay_mean_ns},
             {"processing_delay_jitter_ns", spec.exchange.processing_delay_jitter_ns}}}};
    if (spec.vendor_map) j["vendor_map"] = to_json(*spec.vendor_map);
    return j;
}

inline ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    spec.name = j.value("name", spec.name);
    if (j.contains("scenario")) {
        spec.scenario = detail::parse_scenario(j.at("scenario").get<std::string>(), 0);
    }
    for (const auto& p : j.at("anchor_positions")) spec.anchor_positions.push_back(point_from_json(p));
    for (const auto& p : j.at("tag_positions")) spec.tag_positions.push_back(point_from_json(p));
    const int bw = j.value("bandwidth_mhz", 40);
    if (bw != 20 && bw != 40) throw Error(ErrorCode::ParseError, "bandwidth_mhz must be 20 or 40");
    spec.bandwidth = bw == 20 ? Bandwidth::MHz20 : Bandwidth::MHz40;
    spec.dwell = j.value("dwell", 1);
    if (j.contains("channel")) spec.channel = channel_from_json(j.at("channel"));
    if (j.contains("exchange")) {
        const auto& e = j.at("exchange");
        spec.exchange.frames_per_burst = e.value("frames_per_burst", spec.exchange.frames_per_burst);
        spec.exchange.clock_resolution_ps =
            e.value("clock_resolution_ps", spec.exchange.clock_resolution_ps);
        spec.exchange.processing_delay_mean_ns =
            e.value("processing_delay_mean_ns", spec.exchange.processing_delay_mean_ns);
        spec.exchange.processing_delay_jitter_ns =
            e.value("processing_delay_jitter_ns", spec.exchange.processing_delay_jitter_ns);
    }
    if (j.contains("vendor_map")) spec.vendor_map = piecewise_map_from_json(j.at("vendor_map"));
    spec.check();
    return spec;
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return scenario_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

inline void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << to_json(spec).dump(2) << "\n";
}

/// One estimator entry in an experiment: which variant, fixed
/// hyperparameters, and an optional search budget over a space.
struct EstimatorSpec {
    ml::Variant variant = ml::Variant::Tree;
    ml::TrainingConfig config{};
    int search_budget = 0;  // 0 = train with the fixed config
    ml::SearchStrategy strategy = ml::SearchStrategy::Random;
    ml::HyperSpace space{};  // empty = variant defaults
};

/// Fully reproducible experiment: sources, split, estimators, seed.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::vector<std::string> preset_sources;
    std::vector<std::filesystem::path> file_sources;
    ml::SplitSpec split{};
    std::vector<EstimatorSpec> estimators;
    bool correction_targets = false;
    std::string out_dir;  // optional; the CLI's --out overrides
};

inline ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("seed")) {
        throw Error(ErrorCode::ParseError, "experiment config requires an explicit seed");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.has_seed = true;
    cfg.split.rng_seed = cfg.seed;
    if (j.contains("sources")) {
        for (const auto& s : j.at("sources")) {
            if (s.contains("preset")) {
                cfg.preset_sources.push_back(s.at("preset").get<std::string>());
            } else if (s.contains("path")) {
                cfg.file_sources.emplace_back(s.at("path").get<std::string>());
            } else {
                throw Error(ErrorCode::ParseError, "source needs 'preset' or 'path'");
            }
        }
    }
    if (j.contains("split")) {
        cfg.split.train_fraction = j.at("split").value("train_fraction", cfg.split.train_fraction);
        cfg.split.folds = j.at("split").value("folds", cfg.split.folds);
    }
    cfg.correction_targets = j.value("target_mode", "absolute") == std::string("correction");
    cfg.out_dir = j.value("out_dir", "");
    if (j.contains("estimators")) {
        for (const auto& e : j.at("estimators")) {
            EstimatorSpec spec;
            spec.variant = ml::variant_from_name(e.at("variant").get<std::string>());
            spec.config.variant = spec.variant;
            spec.config.correction_mode = cfg.correction_targets;
            if (e.contains("min_leaf_size")) spec.config.tree_min_leaf = e.at("min_leaf_size");
            if (e.contains("C")) spec.config.svr.C = e.at("C");
            if (e.contains("epsilon")) spec.config.svr.epsilon = e.at("epsilon");
            if (e.contains("sigma_f")) spec.config.gp_kernel.sigma_f = e.at("sigma_f");
            if (e.contains("sigma_l")) spec.config.gp_kernel.sigma_l = e.at("sigma_l");
            if (e.contains("noise_sigma")) spec.config.gp_kernel.noise_sigma = e.at("noise_sigma");
            if (e.contains("gp_max_points")) spec.config.gp_max_points = e.at("gp_max_points");
            if (e.contains("hidden")) spec.config.nn.hidden = e.at("hidden");
            if (e.contains("epochs")) spec.config.nn.epochs = e.at("epochs");
            if (e.contains("learning_rate")) spec.config.nn.learning_rate = e.at("learning_rate");
            if (e.contains("search")) {
                const auto& s = e.at("search");
                spec.search_budget = s.value("budget", 0);
                spec.strategy = ml::search_strategy_from_name(s.value("strategy", "random"));
            }
            cfg.estimators.push_back(std::move(spec));
        }
    }
    return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return experiment_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Foreign log ingestion.
// ---------------------------------------------------------------------------

/// Column mapping for import_external. `columns` maps toolkit field names
/// to source CSV headers; `units` optionally names the source unit per
/// time/distance field.
///
/// Mapping "frame_rssi" builds a single synthetic frame per row carrying
/// the RSSI (and the row's rtt_raw), which keeps flat per-measurement logs
/// trainable; per-frame layouts are out of scope for the mapping path.
struct ImportMapping {
    std::string format = "csv";  // "csv" or "ftm-dataset-v1" (identity)
    char delimiter = ',';
    bool has_header = true;
    std::string name = "imported";
    Scenario scenario = Scenario::Test;
    Bandwidth bandwidth = Bandwidth::MHz40;
    std::vector<std::pair<std::string, std::string>> columns;  // field -> source column
    std::vector<std::pair<std::string, std::string>> units;    // field -> unit
};

inline ImportMapping import_mapping_from_json(const json& j) {
    ImportMapping m;
    m.format = j.value("format", m.format);
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw Error(ErrorCode::ParseError, "delimiter must be one character");
        m.delimiter = d[0];
    }
    m.has_header = j.value("has_header", m.has_header);
    m.name = j.value("name", m.name);
    if (j.contains("scenario")) m.scenario = detail::parse_scenario(j.at("scenario"), 0);
    const int bw = j.value("bandwidth_mhz", 40);
    m.bandwidth = bw == 20 ? Bandwidth::MHz20 : Bandwidth::MHz40;
    if (j.contains("columns")) {
        for (const auto& [field, source] : j.at("columns").items()) {
            m.columns.emplace_back(field, source.get<std::string>());
        }
    }
    if (j.contains("units")) {
        for (const auto& [field, unit] : j.at("units").items()) {
            m.units.emplace_back(field, unit.get<std::string>());
        }
    }
    return m;
}

inline ImportMapping load_import_mapping(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return import_mapping_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

namespace detail {

inline double time_to_ns(double value, const std::string& unit) {
    if (unit == "ps") return value / 1000.0;
    if (unit == "ns") return value;
    if (unit == "us") return value * 1000.0;
    if (unit == "ms") return value * 1e6;
    if (unit == "s") return value * 1e9;
    throw Error(ErrorCode::UnitMismatch, "unknown time unit '" + unit + "'");
}

inline double distance_to_m(double value, const std::string& unit) {
    if (unit == "mm") return value / 1000.0;
    if (unit == "cm") return value / 100.0;
    if (unit == "m") return value;
    if (unit == "km") return value * 1000.0;
    throw Error(ErrorCode::UnitMismatch, "unknown distance unit '" + unit + "'");
}

inline std::vector<std::string> split_on(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == delim) {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

}  // namespace detail

/// Converts a foreign columnar log into a Dataset via the user-supplied
/// mapping. Requires at least an rtt_raw column; unmapped optional fields
/// stay absent.
inline Dataset import_external(const std::filesystem::path& path, const ImportMapping& mapping) {
    if (mapping.format == "ftm-dataset-v1") return read_dataset(path);
    if (mapping.format != "csv") {
        throw Error(ErrorCode::ParseError, "unknown import format '" + mapping.format + "'");
    }

    const auto column_of = [&](const std::string& field) -> std::optional<std::string> {
        for (const auto& [f, source] : mapping.columns)
            if (f == field) return source;
        return std::nullopt;
    };
    const auto unit_of = [&](const std::string& field, const char* fallback) {
        for (const auto& [f, unit] : mapping.units)
            if (f == field) return unit;
        return std::string(fallback);
    };

    if (!column_of("rtt_raw")) {
        throw Error(ErrorCode::MissingRequiredColumn, "mapping must bind 'rtt_raw'");
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());

    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    const auto next_row = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (mapping.has_header) {
        if (!next_row()) throw Error(ErrorCode::ParseError, "missing header row", 1);
        header = detail::split_on(line, mapping.delimiter);
    } else {
        // Column references are 0-based indices when the file has no header.
        header.clear();
    }

    const auto resolve_index = [&](const std::string& source) -> std::size_t {
        if (!header.empty()) {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i] == source) return i;
            }
            throw Error(ErrorCode::MissingRequiredColumn, "source column '" + source + "' not found");
        }
        try {
            return static_cast<std::size_t>(std::stoul(source));
        } catch (const std::exception&) {
            throw Error(ErrorCode::MissingRequiredColumn,
                        "headerless files need numeric column indices; got '" + source + "'");
        }
    };

    struct Binding {
        std::string field;
        std::size_t index;
        std::string unit;
    };
    std::vector<Binding> bindings;
    for (const auto& [field, source] : mapping.columns) {
        std::string unit;
        if (field == "rtt_raw" || field == "rtt_est" || field == "frame_rtt") {
            unit = unit_of(field, "ns");
        } else if (field == "dist_est" || field == "own_est" || field == "true_distance") {
            unit = unit_of(field, "m");
        }
        bindings.push_back({field, resolve_index(source), unit});
    }

    Dataset ds;
    ds.name = mapping.name;
    ds.scenario = mapping.scenario;
    while (next_row()) {
        const auto cells = detail::split_on(line, mapping.delimiter);
        FtmMeasurement m;
        m.bandwidth = mapping.bandwidth;
        std::optional<double> frame_rssi;
        std::optional<double> frame_rtt;
        std::optional<long> declared_frames;
        for (const auto& b : bindings) {
            if (b.index >= cells.size()) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": missing cell for '" + b.field + "'",
                            line_no);
            }
            const std::string& cell = cells[b.index];
            if (cell.empty()) continue;
            if (b.field == "anchor_id") {
                m.anchor_id = cell;
            } else if (b.field == "rtt_raw") {
                m.rtt_raw_ns = detail::time_to_ns(detail::parse_double(cell, line_no, "rtt_raw"), b.unit);
            } else if (b.field == "rtt_est") {
                m.rtt_est_ns = detail::time_to_ns(detail::parse_double(cell, line_no, "rtt_est"), b.unit);
            } else if (b.field == "dist_est") {
                m.dist_est_m =
                    detail::distance_to_m(detail::parse_double(cell, line_no, "dist_est"), b.unit);
            } else if (b.field == "own_est") {
                m.own_est_m =
                    detail::distance_to_m(detail::parse_double(cell, line_no, "own_est"), b.unit);
            } else if (b.field == "true_distance") {
                m.true_distance_m =
                    detail::distance_to_m(detail::parse_double(cell, line_no, "true_distance"), b.unit);
            } else if (b.field == "num_frames") {
                declared_frames = detail::parse_i64(cell, line_no, "num_frames");
            } else if (b.field == "frame_rssi") {
                frame_rssi = detail::parse_double(cell, line_no, "frame_rssi");
            } else if (b.field == "frame_rtt") {
                frame_rtt = detail::time_to_ns(detail::parse_double(cell, line_no, "frame_rtt"), b.unit);
            } else {
                throw Error(ErrorCode::ParseError, "unknown mapped field '" + b.field + "'");
            }
        }
        if (frame_rssi) {
            FtmFrame f;
            f.rssi_dbm = *frame_rssi;
            f.rtt_ns = frame_rtt.value_or(m.rtt_raw_ns);
            m.frames.push_back(f);
        }
        m.num_frames = static_cast<int>(m.frames.size());
        if (declared_frames && *declared_frames != m.num_frames) {
            throw Error(ErrorCode::ValidationFailed,
                        "line " + std::to_string(line_no) + ": num_frames column says " +
                            std::to_string(*declared_frames) + " but " +
                            std::to_string(m.num_frames) + " frames were constructed",
                        line_no);
        }
        ds.measurements.push_back(std::move(m));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Artifact fingerprints (manifest entries, embedded config hashes).
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t file_fnv1a64(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(data);
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace ftm::io
