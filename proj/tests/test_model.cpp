#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftm/channel.hpp"
#include "ftm/ml/compact.hpp"
#include "ftm/ml/model.hpp"
#include "ftm/ml/split.hpp"
#include "ftm/rng.hpp"

#include <filesystem>
#include <unistd.h>

using namespace ftm;
using namespace ftm::ml;

namespace {

std::vector<LabeledSample> synthetic_samples(std::uint64_t seed, int n) {
    Rng rng(seed);
    std::vector<LabeledSample> samples;
    for (int i = 0; i < n; ++i) {
        const double d = rng.uniform(1.0, 20.0);
        const double rtt = rtt_from_distance(d) + rng.normal(0.0, 2.0) +
                           (rng.uniform() < 0.3 ? rng.exponential(20.0) : 0.0);
        const double rssi = -40.0 - 22.0 * std::log10(d) + rng.normal(0.0, 1.5);
        samples.push_back({rtt, rssi, d});
    }
    return samples;
}

}  // namespace

TEST_CASE("tree trained on a constant label predicts it everywhere") {
    Rng rng(1);
    std::vector<LabeledSample> samples;
    for (int i = 0; i < 32; ++i) {
        samples.push_back({rng.uniform(0, 100), rng.uniform(-90, -30), 5.0});
    }
    const auto model = train_tree(samples);
    CHECK(predict(model, 0.0, -50.0) == 5.0);
    CHECK(predict(model, 1000.0, -10.0) == 5.0);
}

TEST_CASE("GP model interpolates training samples through the full predict path") {
    auto samples = synthetic_samples(3, 40);
    KernelParams kernel;
    kernel.noise_sigma = 1e-5;
    const auto model = train_gp(samples, kernel);
    for (const auto& s : samples) {
        CHECK_THAT(predict(model, s), Catch::Matchers::WithinAbs(s.true_distance_m, 1e-3));
    }
}

TEST_CASE("predictions are clamped at zero meters") {
    TrainedModel model;
    model.variant = Variant::Nn;
    NnModel net;
    net.hidden = 1;
    net.w1 = {0.0, 0.0};
    net.b1 = {0.0};
    net.w2 = {0.0};
    net.b2 = -5.0;
    model.params = NnParams{net, 0.0};
    CHECK(predict(model, 10.0, -50.0) == 0.0);
}

TEST_CASE("predictions are frozen and repeatable") {
    const auto samples = synthetic_samples(5, 60);
    const auto model = train_svr(samples, 10.0, 0.1);
    const double a = predict(model, 40.0, -55.0);
    const double b = predict(model, 40.0, -55.0);
    CHECK(a == b);
}

TEST_CASE("correction-mode targets produce usable models") {
    const auto samples = synthetic_samples(6, 120);
    const auto model = train_tree(samples, 4, true);
    CHECK(model.target.correction_mode);
    double err = 0.0;
    for (const auto& s : samples) err += std::abs(predict(model, s) - s.true_distance_m);
    err /= static_cast<double>(samples.size());
    CHECK(err < 2.0);
}

TEST_CASE("export/import round trip preserves predictions for every variant") {
    const auto samples = synthetic_samples(7, 50);
    Rng rng(8);
    NnConfig nn_cfg;
    nn_cfg.epochs = 10;
    nn_cfg.rng_seed = 2;
    const TrainedModel models[] = {
        train_tree(samples),
        train_svr(samples),
        train_gp(samples),
        train_nn(samples, nn_cfg),
    };
    for (const auto& model : models) {
        const auto bytes = export_compact_bytes(model);
        const auto back = import_compact_bytes(bytes);
        CHECK(back.variant == model.variant);
        for (int i = 0; i < 1000; ++i) {
            const double rtt = rng.uniform(0, 200);
            const double rssi = rng.uniform(-95, -20);
            CHECK_THAT(predict(back, rtt, rssi),
                       Catch::Matchers::WithinAbs(predict(model, rtt, rssi), 1e-6));
        }
        CHECK(export_compact_bytes(back) == bytes);  // canonical re-encode
    }
}

TEST_CASE("single-leaf tree exports to exactly one node") {
    Rng rng(9);
    std::vector<LabeledSample> samples;
    for (int i = 0; i < 16; ++i) {
        samples.push_back({rng.uniform(0, 100), rng.uniform(-90, -30), 7.0});
    }
    const auto model = train_tree(samples);
    const auto back = import_compact_bytes(export_compact_bytes(model));
    const auto& tree = std::get<TreeParams>(back.params);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].value == 7.0);
}

TEST_CASE("paper-scale tree export stays under 256 KB") {
    const auto samples = synthetic_samples(10, 7000);
    const auto model = train_tree(samples, 4);
    const auto bytes = export_compact_bytes(model);
    CHECK(bytes.size() < 256 * 1024);
    // node-count bound: at most 2 * (n / min_leaf) nodes
    const auto& tree = std::get<TreeParams>(model.params);
    CHECK(tree.nodes.size() <= 2 * (7000 / 4));
}

TEST_CASE("compact files survive the disk round trip and reject corruption") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / ("ftm-model-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto samples = synthetic_samples(11, 40);
    const auto model = train_tree(samples);
    const auto path = dir / "model.ftmm";
    export_compact(model, path);
    const auto back = import_compact(path);
    CHECK(export_compact_bytes(back) == export_compact_bytes(model));

    auto bytes = export_compact_bytes(model);
    bytes[0] = 'X';
    CHECK_THROWS_AS(import_compact_bytes(bytes), Error);
    bytes[0] = 'F';
    bytes[4] = 9;  // version
    try {
        import_compact_bytes(bytes);
        FAIL("expected UnsupportedVersion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedVersion);
    }
    auto truncated = export_compact_bytes(model);
    truncated.resize(truncated.size() - 3);
    CHECK_THROWS_AS(import_compact_bytes(truncated), Error);
    fs::remove_all(dir);
}

TEST_CASE("identical training inputs give identical exports") {
    const auto samples = synthetic_samples(12, 80);
    CHECK(export_compact_bytes(train_svr(samples)) == export_compact_bytes(train_svr(samples)));
    NnConfig cfg;
    cfg.epochs = 5;
    cfg.rng_seed = 4;
    CHECK(export_compact_bytes(train_nn(samples, cfg)) ==
          export_compact_bytes(train_nn(samples, cfg)));
}
