#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "ftm/channel.hpp"
#include "ftm/io.hpp"

using namespace ftm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ftm-io-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

/// All float fields on the format's precision grid so the file round
/// trips exactly.
Dataset grid_dataset() {
    Dataset ds;
    ds.name = "fixture";
    ds.scenario = Scenario::Indoor;
    FtmMeasurement m;
    m.anchor_id = "anchor-0";
    m.rtt_raw_ns = 66.713;
    m.rtt_est_ns = 60.125;
    m.dist_est_m = 9.013;
    m.num_frames = 2;
    m.bandwidth = Bandwidth::MHz40;
    m.true_distance_m = 10.0;
    FtmFrame f1{-47.25, 66.713, TimestampQuad{0, 40'000, 60'000, 86'713}};
    FtmFrame f2{-48.5, 66.713, std::nullopt};
    m.frames = {f1, f2};
    ds.measurements.push_back(m);

    FtmMeasurement bare;
    bare.anchor_id = "anchor-1";
    bare.rtt_raw_ns = 10.5;
    bare.num_frames = 0;
    bare.bandwidth = Bandwidth::MHz40;
    ds.measurements.push_back(bare);
    return ds;
}

}  // namespace

TEST_CASE("dataset write/read round trip is lossless on grid values") {
    TempDir tmp;
    const auto ds = grid_dataset();
    const auto path = tmp.file("round.ftmds");
    io::write_dataset(ds, path);
    const auto back = io::read_dataset(path);
    CHECK(back == ds);
}

TEST_CASE("writing the same dataset twice is byte-identical") {
    TempDir tmp;
    const auto ds = grid_dataset();
    io::write_dataset(ds, tmp.file("a"));
    io::write_dataset(ds, tmp.file("b"));
    CHECK(io::file_fnv1a64(tmp.file("a")) == io::file_fnv1a64(tmp.file("b")));

    // Distinct datasets never serialize identically.
    auto other = ds;
    other.measurements[0].rtt_raw_ns += 0.001;
    io::write_dataset(other, tmp.file("c"));
    CHECK(io::file_fnv1a64(tmp.file("a")) != io::file_fnv1a64(tmp.file("c")));
}

TEST_CASE("optional fields serialize as empty cells") {
    TempDir tmp;
    Dataset ds;
    ds.name = "opt";
    FtmMeasurement m;
    m.anchor_id = "a";
    m.rtt_raw_ns = 1.0;
    m.num_frames = 0;
    ds.measurements.push_back(m);
    const auto path = tmp.file("opt.ftmds");
    io::write_dataset(ds, path);
    std::ifstream in(path);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.rfind("M,", 0) == 0) {
            CHECK(line == "M,a,1.000,,,,0,");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("validation failure carries the measurement line number") {
    TempDir tmp;
    const auto path = tmp.file("bad.ftmds");
    {
        std::ofstream out(path);
        out << "ftm-dataset,v1\n"
            << "name,bad\n"
            << "scenario,test\n"
            << "bandwidth_mhz,20\n"
            << "units,rtt=ns;dist=m;rssi=dBm;t=ps\n"
            << "measurements,2\n"
            << io::kMeasurementColumns << "\n"
            << io::kFrameColumns << "\n"            // line 8
            << "M,a,15.000,,,,2,\n"                 // line 9
            << "F,-50.00,10.000,,,,\n"              // line 10
            << "F,-50.00,20.000,,,,\n"              // line 11
            << "M,a,1.000,,,,5,\n";                 // line 12: declares 5 frames, has none
    }
    try {
        io::read_dataset(path);
        FAIL("expected ValidationFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ValidationFailed);
        CHECK(e.detail() == 12);
        CHECK(std::string(e.what()).find("FrameCountMismatch") != std::string::npos);
    }

    const auto lenient = io::read_dataset_file(path, true);
    CHECK(lenient.dataset.measurements.size() == 2);
    REQUIRE(lenient.warnings.size() == 1);
    CHECK(lenient.warnings[0].find("line 12") != std::string::npos);
}

TEST_CASE("empty measurement section reads as a valid dataset with a warning") {
    TempDir tmp;
    Dataset empty;
    empty.name = "nothing";
    const auto path = tmp.file("empty.ftmds");
    io::write_dataset(empty, path);
    const auto result = io::read_dataset_file(path);
    CHECK(result.dataset.measurements.empty());
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("empty") != std::string::npos);
}

TEST_CASE("unsupported version and parse errors are distinct") {
    TempDir tmp;
    const auto path = tmp.file("v9.ftmds");
    {
        std::ofstream out(path);
        out << "ftm-dataset,v9\nname,x\n";
    }
    try {
        io::read_dataset(path);
        FAIL("expected UnsupportedVersion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedVersion);
    }

    const auto garbled = tmp.file("garbled.ftmds");
    {
        std::ofstream out(garbled);
        out << "not a dataset\n";
    }
    CHECK_THROWS_AS(io::read_dataset(garbled), Error);
    CHECK_THROWS_AS(io::read_dataset(tmp.file("missing.ftmds")), Error);
}

TEST_CASE("mixed bandwidth cannot be written to one v1 file") {
    TempDir tmp;
    auto ds = grid_dataset();
    ds.measurements[1].bandwidth = Bandwidth::MHz20;
    CHECK_THROWS_AS(io::write_dataset(ds, tmp.file("mixed.ftmds")), Error);
}

TEST_CASE("import_external converts units and builds synthetic frames") {
    TempDir tmp;
    const auto csv = tmp.file("foreign.csv");
    {
        std::ofstream out(csv);
        out << "beacon;rtt_us;rssi;distance_cm\n"
            << "b1;0.0667;-51.5;1000\n"
            << "b2;0.0133;-40.0;200\n";
    }
    io::ImportMapping mapping;
    mapping.delimiter = ';';
    mapping.scenario = Scenario::Test;
    mapping.bandwidth = Bandwidth::MHz20;
    mapping.columns = {{"anchor_id", "beacon"},
                       {"rtt_raw", "rtt_us"},
                       {"frame_rssi", "rssi"},
                       {"true_distance", "distance_cm"}};
    mapping.units = {{"rtt_raw", "us"}, {"true_distance", "cm"}};
    const auto ds = io::import_external(csv, mapping);
    REQUIRE(ds.measurements.size() == 2);
    CHECK_THAT(ds.measurements[0].rtt_raw_ns, Catch::Matchers::WithinAbs(66.7, 1e-9));
    CHECK_THAT(*ds.measurements[0].true_distance_m, Catch::Matchers::WithinAbs(10.0, 1e-12));
    REQUIRE(ds.measurements[0].frames.size() == 1);
    CHECK(ds.measurements[0].frames[0].rssi_dbm == -51.5);
    CHECK(ds.measurements[0].num_frames == 1);
    for (const auto& m : ds.measurements) CHECK(validate_measurement(m).empty());
    CHECK_NOTHROW(to_labeled_sample(ds.measurements[0]));
}

TEST_CASE("import_external error paths") {
    TempDir tmp;
    const auto csv = tmp.file("foreign.csv");
    {
        std::ofstream out(csv);
        out << "a,b\n1,2\n";
    }
    io::ImportMapping no_rtt;
    no_rtt.columns = {{"anchor_id", "a"}};
    try {
        io::import_external(csv, no_rtt);
        FAIL("expected MissingRequiredColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingRequiredColumn);
    }

    io::ImportMapping bad_column;
    bad_column.columns = {{"rtt_raw", "nope"}};
    CHECK_THROWS_AS(io::import_external(csv, bad_column), Error);

    io::ImportMapping bad_unit;
    bad_unit.columns = {{"rtt_raw", "a"}};
    bad_unit.units = {{"rtt_raw", "fortnights"}};
    try {
        io::import_external(csv, bad_unit);
        FAIL("expected UnitMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnitMismatch);
    }
}

TEST_CASE("identity mapping over a v1 file equals read_dataset") {
    TempDir tmp;
    const auto ds = grid_dataset();
    const auto path = tmp.file("native.ftmds");
    io::write_dataset(ds, path);
    io::ImportMapping identity;
    identity.format = "ftm-dataset-v1";
    CHECK(io::import_external(path, identity) == io::read_dataset(path));
}

TEST_CASE("correction map and scenario configs round trip through JSON") {
    TempDir tmp;
    PiecewiseLinearMap map;
    map.breakpoints_ns = {10.0, 124.0};
    map.segments = {{0.95, 0.25}, {0.8, -1.5}, {1.1, -20.0}};
    const auto map_path = tmp.file("map.json");
    io::save_correction_map(map, map_path);
    CHECK(io::load_correction_map(map_path) == map);

    auto spec = scenario_preset("indoor-40");
    spec.vendor_map = map;
    const auto spec_path = tmp.file("scenario.json");
    io::save_scenario(spec, spec_path);
    const auto loaded = io::load_scenario(spec_path);
    CHECK(loaded.name == spec.name);
    CHECK(loaded.anchor_positions == spec.anchor_positions);
    CHECK(loaded.tag_positions == spec.tag_positions);
    CHECK(loaded.channel.nlos_probability == spec.channel.nlos_probability);
    CHECK(loaded.vendor_map == spec.vendor_map);
    CHECK(loaded.exchange.frames_per_burst == spec.exchange.frames_per_burst);
}

TEST_CASE("shipped preset files stay in sync with the built-ins") {
    for (const auto& name : scenario_preset_names()) {
        const auto path = fs::path(FTM_SOURCE_DIR) / "configs" / "presets" / (name + ".json");
        REQUIRE(fs::exists(path));
        const auto loaded = io::load_scenario(path);
        CHECK(io::to_json(loaded) == io::to_json(scenario_preset(name)));
    }
}

TEST_CASE("experiment config requires a seed") {
    const auto j = io::json::parse(R"({"sources":[{"preset":"indoor-40"}]})");
    CHECK_THROWS_AS(io::experiment_from_json(j), Error);
    const auto ok = io::json::parse(R"({
        "seed": 7,
        "sources": [{"preset": "indoor-40"}, {"path": "x.ftmds"}],
        "split": {"train_fraction": 0.7, "folds": 5},
        "estimators": [{"variant": "tree", "min_leaf_size": 4},
                       {"variant": "svr", "C": 5.0, "search": {"budget": 3}}]
    })");
    const auto cfg = io::experiment_from_json(ok);
    CHECK(cfg.seed == 7);
    CHECK(cfg.preset_sources.size() == 1);
    CHECK(cfg.file_sources.size() == 1);
    REQUIRE(cfg.estimators.size() == 2);
    CHECK(cfg.estimators[0].config.tree_min_leaf == 4);
    CHECK(cfg.estimators[1].config.svr.C == 5.0);
    CHECK(cfg.estimators[1].search_budget == 3);
}
