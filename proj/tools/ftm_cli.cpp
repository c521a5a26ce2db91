// ftm - batch frontend for the FTM ranging toolkit.
//
// Subcommands: simulate, ingest, fit-correction, train, evaluate, energy,
// export-model. Every run drops its artifacts plus a manifest.json
// (artifact names and FNV-1a fingerprints, and the hash of the resolved
// configuration) into --out. Stochastic commands require an explicit
// --seed; reruns with the same inputs are byte-identical.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "ftm/ftm.hpp"

namespace fs = std::filesystem;
using ftm::io::json;

namespace {

// Exit codes by failure class.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitIo = 5;

int exit_code_for(ftm::ErrorCode code) {
    using ftm::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptySearchSpace:
        case ErrorCode::UnsupportedVariant:
            return kExitConfig;
        case ErrorCode::NotConverged:
        case ErrorCode::DivergedLoss:
        case ErrorCode::FactorizationFailed:
            return kExitConvergence;
        case ErrorCode::IoFailure:
            return kExitIo;
        default:
            return kExitData;
    }
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

/// Collects artifacts under the output directory and finalizes the
/// manifest. Artifact contents never depend on the directory path, so two
/// runs into different directories still compare byte-equal.
class ArtifactSink {
public:
    ArtifactSink(fs::path dir, std::string command, const json& config)
        : dir_(std::move(dir)), command_(std::move(command)) {
        fs::create_directories(dir_);
        config_hash_ = ftm::io::hex64(ftm::io::fnv1a64(config.dump()));
    }

    const fs::path& dir() const { return dir_; }
    const std::string& config_hash() const { return config_hash_; }

    fs::path reserve(const std::string& name) { return dir_ / name; }

    void note(const std::string& name) {
        entries_.push_back({{"name", name}, {"fnv1a64", ftm::io::hex64(ftm::io::file_fnv1a64(dir_ / name))}});
    }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw ftm::Error(ftm::ErrorCode::IoFailure, "cannot write " + name);
        out << content;
        out.close();
        note(name);
    }

    void finish() {
        json manifest{{"command", command_}, {"config_hash", config_hash_}, {"artifacts", entries_}};
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        if (!out) throw ftm::Error(ftm::ErrorCode::IoFailure, "cannot write manifest.json");
        out << manifest.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::string command_;
    std::string config_hash_;
    json entries_ = json::array();
};

ftm::ScenarioSpec resolve_scenario(const std::string& preset, const std::string& scenario_file) {
    if (!preset.empty() && !scenario_file.empty()) {
        throw ftm::Error(ftm::ErrorCode::InvalidArgument, "give either --preset or --scenario");
    }
    if (!scenario_file.empty()) return ftm::io::load_scenario(scenario_file);
    if (!preset.empty()) return ftm::scenario_preset(preset);
    throw ftm::Error(ftm::ErrorCode::InvalidArgument, "need --preset or --scenario");
}

/// Sources for train/evaluate: presets are generated with a stream derived
/// from the global seed and their position, files are read as-is.
std::vector<ftm::Dataset> resolve_sources(const std::vector<std::string>& presets,
                                          const std::vector<std::string>& files,
                                          std::uint64_t seed) {
    std::vector<ftm::Dataset> out;
    const ftm::Rng root(seed);
    std::size_t index = 0;
    for (const auto& name : presets) {
        auto spec = ftm::scenario_preset(name);
        spec.channel.rng_seed = root.derive(index++).seed();
        out.push_back(ftm::generate_dataset(spec));
    }
    for (const auto& path : files) {
        out.push_back(ftm::io::read_dataset(path));
        ++index;
    }
    if (out.empty()) {
        throw ftm::Error(ftm::ErrorCode::InvalidArgument, "need at least one --preset or --data source");
    }
    return out;
}

double parse_period_s(const std::string& token) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ftm::Error(ftm::ErrorCode::InvalidArgument, "bad period '" + token + "'");
    }
    const std::string suffix = token.substr(used);
    if (suffix.empty() || suffix == "s") return value;
    if (suffix == "m" || suffix == "min") return value * 60.0;
    if (suffix == "h") return value * 3600.0;
    throw ftm::Error(ftm::ErrorCode::InvalidArgument, "bad period suffix '" + suffix + "'");
}

json model_to_json(const ftm::ml::TrainedModel& model) {
    using namespace ftm::ml;
    json j{{"variant", variant_name(model.variant)},
           {"feature_order", {"rtt_raw_ns", "mean_rssi_dbm"}},
           {"normalizer",
            {{"means", model.normalizer.means}, {"stds", model.normalizer.stds}}},
           {"target",
            {{"mean", model.target.mean},
             {"std", model.target.std},
             {"correction_mode", model.target.correction_mode}}}};
    switch (model.variant) {
        case Variant::Tree: {
            const auto& p = std::get<TreeParams>(model.params);
            json nodes = json::array();
            for (const auto& n : p.nodes) {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"value", n.value},
                                 {"left", n.left},
                                 {"right", n.right}});
            }
            j["tree"] = {{"min_leaf_size", p.min_leaf_size}, {"nodes", nodes}};
            break;
        }
        case Variant::Svr: {
            const auto& p = std::get<SvrParams>(model.params);
            j["svr"] = {{"C", p.C},
                        {"epsilon", p.epsilon},
                        {"bias", p.solution.bias},
                        {"support_vectors", p.solution.support_vectors.size()}};
            break;
        }
        case Variant::Gp: {
            const auto& p = std::get<GpParams>(model.params);
            j["gp"] = {{"sigma_f", p.solution.kernel.sigma_f},
                       {"sigma_l", p.solution.kernel.sigma_l},
                       {"noise_sigma", p.solution.kernel.noise_sigma},
                       {"points", p.solution.inputs.size()}};
            break;
        }
        case Variant::Nn: {
            const auto& p = std::get<NnParams>(model.params);
            j["nn"] = {{"hidden", p.net.hidden}, {"validation_loss", p.validation_loss}};
            break;
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string preset;
    std::string scenario_file;
    std::string out;
    std::uint64_t seed = 0;
    std::string vendor_map_file;
};

void run_simulate(const SimulateArgs& args) {
    auto spec = resolve_scenario(args.preset, args.scenario_file);
    spec.channel.rng_seed = args.seed;
    if (!args.vendor_map_file.empty()) {
        spec.vendor_map = ftm::io::load_correction_map(args.vendor_map_file);
    }
    const json config{{"command", "simulate"},
                      {"scenario", ftm::io::to_json(spec)},
                      {"seed", args.seed}};
    ArtifactSink sink(args.out, "simulate", config);
    const auto ds = ftm::generate_dataset(spec);
    ftm::io::write_dataset(ds, sink.reserve("dataset.ftmds"));
    sink.note("dataset.ftmds");
    sink.write_text("simulate_report.txt",
                    "simulate " + spec.name + "\nconfig_hash " + sink.config_hash() + "\n" +
                        "measurements " + std::to_string(ds.measurements.size()) + "\n");
    sink.finish();
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string mapping;
    std::string out;
    bool lenient = false;
};

void run_ingest(const IngestArgs& args) {
    const auto mapping = ftm::io::load_import_mapping(args.mapping);
    const json config{{"command", "ingest"}, {"input", args.input}, {"lenient", args.lenient}};
    ArtifactSink sink(args.out, "ingest", config);
    auto ds = ftm::io::import_external(args.input, mapping);
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < ds.measurements.size(); ++i) {
        for (const auto& v : ftm::validate_measurement(ds.measurements[i])) {
            const std::string msg =
                "measurement " + std::to_string(i) + ": " + ftm::violation_name(v.kind);
            if (!args.lenient) throw ftm::Error(ftm::ErrorCode::ValidationFailed, msg);
            warnings.push_back(msg);
        }
    }
    ftm::io::write_dataset(ds, sink.reserve("dataset.ftmds"));
    sink.note("dataset.ftmds");
    std::string report = "ingest\nconfig_hash " + sink.config_hash() + "\nmeasurements " +
                         std::to_string(ds.measurements.size()) + "\n";
    for (const auto& w : warnings) report += "warning " + w + "\n";
    sink.write_text("ingest_report.txt", report);
    sink.finish();
}

// ---------------------------------------------------------------------------
// fit-correction
// ---------------------------------------------------------------------------

struct FitCorrectionArgs {
    std::vector<std::string> data;
    std::string out;
    int segments = 3;
    std::vector<double> breakpoints;
};

void run_fit_correction(const FitCorrectionArgs& args) {
    const json config{{"command", "fit-correction"},
                      {"data", args.data},
                      {"segments", args.segments},
                      {"breakpoints", args.breakpoints}};
    ArtifactSink sink(args.out, "fit-correction", config);

    std::vector<ftm::RttPair> pairs;
    for (const auto& path : args.data) {
        const auto ds = ftm::io::read_dataset(path);
        for (const auto& m : ds.measurements) {
            if (m.rtt_est_ns) pairs.push_back({m.rtt_raw_ns, *m.rtt_est_ns});
        }
    }
    if (pairs.empty()) {
        throw ftm::Error(ftm::ErrorCode::InsufficientData, "no measurements carry rtt_est");
    }

    std::vector<double> breakpoints = args.breakpoints;
    if (breakpoints.empty()) breakpoints = ftm::detect_breakpoints(pairs, args.segments);
    const auto fit = ftm::fit_segmented(pairs, breakpoints);

    ftm::io::save_correction_map(fit.map, sink.reserve("correction_map.json"));
    sink.note("correction_map.json");

    std::string report = "fit-correction\nconfig_hash " + sink.config_hash() + "\npairs " +
                         std::to_string(pairs.size()) + "\n";
    for (std::size_t b = 0; b < breakpoints.size(); ++b) {
        report += "breakpoint_" + std::to_string(b) + "_ns " + fixed(breakpoints[b], 3) + "\n";
    }
    for (std::size_t s = 0; s < fit.map.segments.size(); ++s) {
        report += "segment_" + std::to_string(s) + " slope " + fixed(fit.map.segments[s].slope, 6) +
                  " intercept_ns " + fixed(fit.map.segments[s].intercept_ns, 4) + " rmse_ns " +
                  fixed(fit.segment_rmse_ns[s], 4) + "\n";
    }
    report += "total_rmse_ns " + fixed(fit.total_rmse_ns, 4) + "\n";
    sink.write_text("correction_report.txt", report);
    sink.finish();
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config_file;
    std::vector<std::string> presets;
    std::vector<std::string> data;
    std::string variant = "tree";
    std::string out;
    std::uint64_t seed = 0;
    double train_fraction = 0.70;
    int folds = 5;
    int budget = 0;
    std::string strategy = "random";
    bool correction_targets = false;
    int min_leaf = 4;
    double svr_c = 10.0;
    double svr_epsilon = 0.1;
    double gp_sigma_f = 4.6873;
    double gp_sigma_l = 0.7051;
    double gp_noise = 0.1;
    std::size_t gp_max_points = 2000;
    int nn_hidden = 100;
    int nn_epochs = 200;
    double nn_lr = 1e-3;
};

struct TrainPlanEntry {
    ftm::io::EstimatorSpec spec;
};

void train_one(const ftm::io::EstimatorSpec& entry, const std::vector<ftm::LabeledSample>& train,
               const std::vector<ftm::LabeledSample>& test, std::uint64_t seed, int folds,
               ArtifactSink& sink, std::string& report) {
    using namespace ftm::ml;
    TrainingConfig cfg = entry.config;
    cfg.variant = entry.variant;
    cfg.nn.rng_seed = ftm::Rng(seed).derive(0x7261).seed();
    cfg.gp_subsample_seed = cfg.nn.rng_seed;

    const std::string name = variant_name(entry.variant);
    report += "estimator " + name + "\n";

    if (entry.search_budget > 0) {
        const auto space = entry.space.dims.empty() ? HyperSpace::defaults(entry.variant) : entry.space;
        const auto cv = cross_validate(train, entry.variant, space, folds, entry.search_budget,
                                       ftm::Rng(seed).derive(0xc501).seed(), entry.strategy, cfg);
        for (const auto& [pname, value] : cv.best_params) {
            apply_hyperparameter(cfg, pname, value);
            report += "  cv_best " + pname + " " + fixed(value, 6) + "\n";
        }
        report += "  cv_rmse_m " + fixed(cv.best_rmse, 4) + " over " +
                  std::to_string(cv.evaluations.size()) + " candidates\n";
    }

    const auto model = train_model(train, cfg);
    const std::string file = "model_" + name + ".ftmm";
    export_compact(model, sink.reserve(file));
    sink.note(file);
    report += "  train_rmse_m " + fixed(rmse(model, train), 4) + "\n";
    if (!test.empty()) report += "  test_rmse_m " + fixed(rmse(model, test), 4) + "\n";
}

void run_train(const TrainArgs& args) {
    using namespace ftm::ml;

    std::vector<ftm::io::EstimatorSpec> plan;
    std::vector<std::string> presets = args.presets;
    std::vector<std::string> files = args.data;
    std::uint64_t seed = args.seed;
    ftm::ml::SplitSpec split_spec;
    split_spec.train_fraction = args.train_fraction;
    split_spec.folds = args.folds;
    bool correction = args.correction_targets;

    json config_json;
    if (!args.config_file.empty()) {
        const auto experiment = ftm::io::load_experiment(args.config_file);
        seed = experiment.seed;
        presets = experiment.preset_sources;
        files.clear();
        for (const auto& p : experiment.file_sources) files.push_back(p.string());
        split_spec = experiment.split;
        plan = experiment.estimators;
        correction = experiment.correction_targets;
        std::ifstream in(args.config_file, std::ios::binary);
        config_json = json::parse(in);
    } else {
        ftm::io::EstimatorSpec spec;
        spec.variant = variant_from_name(args.variant);
        spec.config.variant = spec.variant;
        spec.config.correction_mode = correction;
        spec.config.tree_min_leaf = args.min_leaf;
        spec.config.svr.C = args.svr_c;
        spec.config.svr.epsilon = args.svr_epsilon;
        spec.config.gp_kernel.sigma_f = args.gp_sigma_f;
        spec.config.gp_kernel.sigma_l = args.gp_sigma_l;
        spec.config.gp_kernel.noise_sigma = args.gp_noise;
        spec.config.gp_max_points = args.gp_max_points;
        spec.config.nn.hidden = args.nn_hidden;
        spec.config.nn.epochs = args.nn_epochs;
        spec.config.nn.learning_rate = args.nn_lr;
        spec.search_budget = args.budget;
        spec.strategy = search_strategy_from_name(args.strategy);
        plan.push_back(spec);
        config_json = {{"command", "train"},    {"presets", presets},
                       {"data", files},         {"variant", args.variant},
                       {"seed", seed},          {"train_fraction", args.train_fraction},
                       {"folds", args.folds},   {"budget", args.budget},
                       {"strategy", args.strategy}, {"correction_targets", correction},
                       {"min_leaf", args.min_leaf}, {"svr_c", args.svr_c},
                       {"svr_epsilon", args.svr_epsilon}, {"gp_sigma_f", args.gp_sigma_f},
                       {"gp_sigma_l", args.gp_sigma_l},   {"gp_noise", args.gp_noise},
                       {"gp_max_points", args.gp_max_points}, {"nn_hidden", args.nn_hidden},
                       {"nn_epochs", args.nn_epochs}, {"nn_lr", args.nn_lr}};
    }
    split_spec.rng_seed = seed;

    ArtifactSink sink(args.out, "train", config_json);

    const auto datasets = resolve_sources(presets, files, seed);
    std::vector<std::vector<ftm::LabeledSample>> sources;
    for (const auto& ds : datasets) sources.push_back(ftm::labeled_samples(ds));
    const auto parts = split(sources, split_spec);

    std::string report = "train\nconfig_hash " + sink.config_hash() + "\nsamples_train " +
                         std::to_string(parts.train.size()) + "\nsamples_test " +
                         std::to_string(parts.test.size()) + "\n";
    for (const auto& entry : plan) {
        train_one(entry, parts.train, parts.test, seed, split_spec.folds, sink, report);
    }
    sink.write_text("train_report.txt", report);
    sink.finish();
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::vector<std::string> presets;
    std::vector<std::string> data;
    std::vector<std::string> models;
    std::string out;
    std::uint64_t seed = 0;
    double train_fraction = 0.70;
    bool all_measurements = false;  // skip the split, evaluate everything
};

void run_evaluate(const EvaluateArgs& args) {
    const json config{{"command", "evaluate"},   {"presets", args.presets},
                      {"data", args.data},       {"models", args.models},
                      {"seed", args.seed},       {"train_fraction", args.train_fraction},
                      {"all_measurements", args.all_measurements}};
    ArtifactSink sink(args.out, "evaluate", config);

    const auto datasets = resolve_sources(args.presets, args.data, args.seed);

    // Test partition mirrors train: same per-source derived streams.
    std::vector<const ftm::FtmMeasurement*> test_measurements;
    const ftm::Rng root(args.seed);
    for (std::size_t s = 0; s < datasets.size(); ++s) {
        const auto& ms = datasets[s].measurements;
        if (ms.empty()) {
            throw ftm::Error(ftm::ErrorCode::EmptySource, "source " + std::to_string(s) + " is empty");
        }
        if (args.all_measurements) {
            for (const auto& m : ms) test_measurements.push_back(&m);
        } else {
            // Match the sample-level split: shuffle the labeled subset.
            std::vector<std::size_t> labeled;
            for (std::size_t i = 0; i < ms.size(); ++i) {
                if (!ms[i].frames.empty() && ms[i].true_distance_m) labeled.push_back(i);
            }
            const auto idx =
                ftm::ml::split_indices(labeled.size(), args.train_fraction, root.derive(s));
            for (std::size_t i : idx.test) test_measurements.push_back(&ms[labeled[i]]);
        }
    }

    std::vector<std::pair<std::string, ftm::ml::TrainedModel>> models;
    for (const auto& path : args.models) {
        models.emplace_back(fs::path(path).stem().string(), ftm::ml::import_compact(path));
    }

    std::vector<ftm::ErrorRecord> records;
    ftm::Dataset profile_subset;
    for (const auto* mp : test_measurements) {
        const auto& m = *mp;
        if (!m.true_distance_m) continue;
        const double truth = *m.true_distance_m;
        const auto scenario = datasets.front().scenario;
        records.push_back(ftm::make_error_record(
            "raw", truth, std::max(0.0, ftm::distance_from_rtt(m.rtt_raw_ns)), scenario,
            m.bandwidth));
        if (m.dist_est_m) {
            records.push_back(ftm::make_error_record("vendor", truth, *m.dist_est_m, scenario,
                                                     m.bandwidth));
        }
        if (m.own_est_m) {
            records.push_back(ftm::make_error_record("own", truth, *m.own_est_m, scenario,
                                                     m.bandwidth));
        }
        if (!m.frames.empty()) {
            const auto sample = ftm::to_labeled_sample(m);
            for (const auto& [name, model] : models) {
                records.push_back(ftm::make_error_record(
                    name, truth, ftm::ml::predict(model, sample), scenario, m.bandwidth));
            }
            profile_subset.measurements.push_back(m);
        }
    }
    if (records.empty()) {
        throw ftm::Error(ftm::ErrorCode::EmptyInput, "no labeled measurements to evaluate");
    }

    const auto report = ftm::compare(records);
    sink.write_text("summary.csv", ftm::format_comparison_csv(report));
    sink.write_text("summary.txt", "evaluate\nconfig_hash " + sink.config_hash() + "\n\n" +
                                       ftm::format_comparison_table(report));
    for (const auto& e : report.estimators) {
        sink.write_text("ecdf_" + e.name + ".csv", ftm::format_ecdf_csv(e.curve));
    }
    if (!profile_subset.measurements.empty()) {
        sink.write_text("rssi_profile.csv",
                        ftm::format_rssi_profile_csv(ftm::rssi_profile(profile_subset)));
    }
    sink.finish();
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

struct EnergyArgs {
    std::string periods = "10s,1m,10m,30m,1h";
    double i_sleep = 0.5606;
    double i_ftm = 75.6;
    double t_ftm = 0.636;
    double capacity = 2000.0;
    std::string out;
};

void run_energy(const EnergyArgs& args) {
    ftm::EnergyProfile profile{args.i_sleep, args.i_ftm, args.t_ftm, args.capacity};
    std::vector<std::string> tokens;
    std::string token;
    for (char c : args.periods + ",") {
        if (c == ',') {
            if (!token.empty()) tokens.push_back(token);
            token.clear();
        } else {
            token.push_back(c);
        }
    }

    const json config{{"command", "energy"},   {"periods", args.periods},
                      {"i_sleep", args.i_sleep}, {"i_ftm", args.i_ftm},
                      {"t_ftm", args.t_ftm},     {"capacity", args.capacity}};
    ArtifactSink sink(args.out, "energy", config);

    std::string csv = "period_s,avg_current_ma,lifetime_days,idle_time_fraction,idle_mah,ftm_mah\n";
    char line[160];
    std::string table;
    std::snprintf(line, sizeof(line), "%-10s %14s %14s %12s\n", "period", "avg current", "lifetime",
                  "idle time");
    table += line;
    for (const auto& t : tokens) {
        const double period = parse_period_s(t);
        const double current = ftm::average_current(profile, period);
        const int days = ftm::battery_lifetime_days(profile, period);
        const auto budget = ftm::daily_budget(profile, period);
        csv += fixed(period, 3) + ',' + fixed(current, 4) + ',' + std::to_string(days) + ',' +
               fixed(budget.idle_time_fraction, 6) + ',' + fixed(budget.idle_mah, 3) + ',' +
               fixed(budget.ftm_mah, 3) + '\n';
        std::snprintf(line, sizeof(line), "%-10s %11.2f mA %9d days %9.2f %%\n", t.c_str(), current,
                      days, 100.0 * budget.idle_time_fraction);
        table += line;
    }
    sink.write_text("energy_report.csv", csv);
    sink.write_text("energy_report.txt", "energy (i_sleep=" + fixed(args.i_sleep, 4) +
                                             " mA, i_ftm=" + fixed(args.i_ftm, 1) + " mA, t_ftm=" +
                                             fixed(args.t_ftm, 3) + " s, battery=" +
                                             fixed(args.capacity, 0) + " mAh)\nconfig_hash " +
                                             sink.config_hash() + "\n\n" + table);
    sink.finish();
}

// ---------------------------------------------------------------------------
// export-model
// ---------------------------------------------------------------------------

struct ExportModelArgs {
    std::string model;
    std::string out;
    bool dump_json = false;
};

void run_export_model(const ExportModelArgs& args) {
    const json config{{"command", "export-model"}, {"model", args.model}, {"json", args.dump_json}};
    ArtifactSink sink(args.out, "export-model", config);
    const auto model = ftm::ml::import_compact(args.model);
    ftm::ml::export_compact(model, sink.reserve("model.ftmm"));
    sink.note("model.ftmm");
    if (args.dump_json) {
        sink.write_text("model.json", model_to_json(model).dump(2) + "\n");
    }
    sink.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wi-Fi FTM ranging toolkit"};
    app.require_subcommand(1);
    std::function<void()> run;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a scenario");
    simulate->add_option("--preset", sim.preset, "Built-in scenario preset name");
    simulate->add_option("--scenario", sim.scenario_file, "Scenario JSON file");
    simulate->add_option("--vendor-map", sim.vendor_map_file,
                         "Correction map JSON to emulate firmware estimates");
    simulate->add_option("--seed", sim.seed, "RNG seed")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->callback([&] { run = [&] { run_simulate(sim); }; });

    IngestArgs ing;
    auto* ingest = app.add_subcommand("ingest", "Convert an external log into the dataset format");
    ingest->add_option("--input", ing.input, "Foreign log file")->required();
    ingest->add_option("--mapping", ing.mapping, "Column mapping JSON")->required();
    ingest->add_option("--out", ing.out, "Output directory")->required();
    ingest->add_flag("--lenient", ing.lenient, "Downgrade validation failures to warnings");
    ingest->callback([&] { run = [&] { run_ingest(ing); }; });

    FitCorrectionArgs fit;
    auto* fitc = app.add_subcommand("fit-correction",
                                    "Recover the firmware's piecewise-linear RTT correction");
    fitc->add_option("--data", fit.data, "Dataset file(s) with rtt_est")->required();
    fitc->add_option("--segments", fit.segments, "Segment count for breakpoint detection");
    fitc->add_option("--breakpoints", fit.breakpoints, "Fixed breakpoints (skip detection)");
    fitc->add_option("--out", fit.out, "Output directory")->required();
    fitc->callback([&] { run = [&] { run_fit_correction(fit); }; });

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Split, cross-validate and train an estimator");
    train->add_option("--config", tr.config_file, "Experiment config JSON (overrides flags)");
    train->add_option("--preset", tr.presets, "Synthetic preset source(s)");
    train->add_option("--data", tr.data, "Dataset file source(s)");
    train->add_option("--variant", tr.variant, "tree|svr|gp|nn");
    train->add_option("--seed", tr.seed, "Global seed");
    train->add_option("--train-fraction", tr.train_fraction, "Per-source train fraction");
    train->add_option("--folds", tr.folds, "Cross-validation folds");
    train->add_option("--budget", tr.budget, "Hyperparameter search budget (0 = fixed config)");
    train->add_option("--strategy", tr.strategy, "random|grid|surrogate");
    train->add_flag("--correction-targets", tr.correction_targets,
                    "Train on distance corrections instead of absolute distances");
    train->add_option("--min-leaf", tr.min_leaf, "Tree minimum leaf size");
    train->add_option("--svr-c", tr.svr_c, "SVR box constraint");
    train->add_option("--svr-epsilon", tr.svr_epsilon, "SVR tube half-width");
    train->add_option("--gp-sigma-f", tr.gp_sigma_f, "GP signal std");
    train->add_option("--gp-sigma-l", tr.gp_sigma_l, "GP length scale");
    train->add_option("--gp-noise", tr.gp_noise, "GP observation noise std");
    train->add_option("--gp-max-points", tr.gp_max_points, "GP training point cap");
    train->add_option("--nn-hidden", tr.nn_hidden, "NN hidden width");
    train->add_option("--nn-epochs", tr.nn_epochs, "NN training epochs");
    train->add_option("--nn-lr", tr.nn_lr, "NN learning rate");
    train->add_option("--out", tr.out, "Output directory")->required();
    train->callback([&] {
        if (tr.config_file.empty() && train->count("--seed") == 0) {
            throw CLI::ValidationError("--seed is required (or provide --config)");
        }
        run = [&] { run_train(tr); };
    });

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Error reports for baselines and trained models");
    evaluate->add_option("--preset", ev.presets, "Synthetic preset source(s)");
    evaluate->add_option("--data", ev.data, "Dataset file source(s)");
    evaluate->add_option("--model", ev.models, "Compact model file(s)");
    evaluate->add_option("--seed", ev.seed, "Global seed (must match train for the same split)")
        ->required();
    evaluate->add_option("--train-fraction", ev.train_fraction, "Per-source train fraction");
    evaluate->add_flag("--all-measurements", ev.all_measurements,
                       "Evaluate every measurement instead of the held-out split");
    evaluate->add_option("--out", ev.out, "Output directory")->required();
    evaluate->callback([&] { run = [&] { run_evaluate(ev); }; });

    EnergyArgs en;
    auto* energy = app.add_subcommand("energy", "Duty-cycle current and battery lifetime report");
    energy->add_option("--periods", en.periods, "Comma list, e.g. 10s,1m,10m,30m,1h");
    energy->add_option("--i-sleep", en.i_sleep, "Deep sleep current (mA)");
    energy->add_option("--i-ftm", en.i_ftm, "Average FTM current (mA)");
    energy->add_option("--t-ftm", en.t_ftm, "FTM operation duration (s)");
    energy->add_option("--capacity", en.capacity, "Battery capacity (mAh)");
    energy->add_option("--out", en.out, "Output directory")->required();
    energy->callback([&] { run = [&] { run_energy(en); }; });

    ExportModelArgs ex;
    auto* export_model =
        app.add_subcommand("export-model", "Verify, re-encode and inspect a compact model");
    export_model->add_option("--model", ex.model, "Compact model file")->required();
    export_model->add_flag("--json", ex.dump_json, "Also write a readable JSON dump");
    export_model->add_option("--out", ex.out, "Output directory")->required();
    export_model->callback([&] { run = [&] { run_export_model(ex); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        run();
    } catch (const ftm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
