#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftm/ml/nn.hpp"
#include "ftm/rng.hpp"

using namespace ftm;
using namespace ftm::ml;

namespace {

NnModel random_net(int hidden, Rng& rng) {
    NnModel net;
    net.hidden = hidden;
    const auto h = static_cast<std::size_t>(hidden);
    net.w1.resize(h * 2);
    net.b1.resize(h);
    net.w2.resize(h);
    for (auto& w : net.w1) w = rng.normal(0.0, 0.8);
    for (auto& b : net.b1) b = rng.normal(0.0, 0.3);
    for (auto& w : net.w2) w = rng.normal(0.0, 0.8);
    net.b2 = rng.normal(0.0, 0.3);
    return net;
}

double loss_only(const NnModel& net, const std::vector<Features>& xs,
                 const std::vector<double>& ys, const std::vector<std::size_t>& batch) {
    double loss = 0.0;
    for (std::size_t i : batch) {
        const double e = net.predict(xs[i]) - ys[i];
        loss += e * e / static_cast<double>(batch.size());
    }
    return loss;
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(1234);
    auto net = random_net(7, rng);
    std::vector<Features> xs;
    std::vector<double> ys;
    for (int i = 0; i < 5; ++i) {
        xs.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
        ys.push_back(rng.uniform(-1, 3));
    }
    std::vector<std::size_t> batch{0, 1, 2, 3, 4};
    NnGradient grad;
    nn_loss_and_gradient(net, xs, ys, batch, grad);

    const double h = 1e-5;
    double worst = 0.0;
    const auto check_param = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = loss_only(net, xs, ys, batch);
        param = saved - h;
        const double down = loss_only(net, xs, ys, batch);
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double rel =
            std::abs(analytic - numeric) / std::max({1e-8, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, rel);
    };
    for (std::size_t k = 0; k < net.w1.size(); ++k) check_param(net.w1[k], grad.w1[k]);
    for (std::size_t k = 0; k < net.b1.size(); ++k) check_param(net.b1[k], grad.b1[k]);
    for (std::size_t k = 0; k < net.w2.size(); ++k) check_param(net.w2[k], grad.w2[k]);
    check_param(net.b2, grad.b2);
    CHECK(worst < 1e-4);
}

TEST_CASE("zero output layer predicts exactly b2") {
    Rng rng(5);
    auto net = random_net(16, rng);
    for (auto& w : net.w2) w = 0.0;
    net.b2 = 4.25;
    for (int i = 0; i < 20; ++i) {
        CHECK(net.predict({rng.uniform(-5, 5), rng.uniform(-5, 5)}) == 4.25);
    }
}

TEST_CASE("constant targets are learned to a tight loss") {
    Rng rng(6);
    std::vector<Features> xs;
    std::vector<double> ys;
    for (int i = 0; i < 40; ++i) {
        xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        ys.push_back(2.5);
    }
    NnConfig cfg;
    cfg.hidden = 10;
    cfg.epochs = 30;
    cfg.rng_seed = 3;
    const auto result = train_nn(xs, ys, cfg);
    CHECK(result.validation_loss < 1e-4);
    for (int i = 0; i < 10; ++i) {
        CHECK_THAT(result.model.predict({rng.uniform(-1, 1), rng.uniform(-1, 1)}),
                   Catch::Matchers::WithinAbs(2.5, 1e-2));
    }
}

TEST_CASE("training fits a smooth surface") {
    Rng rng(8);
    std::vector<Features> xs;
    std::vector<double> ys;
    for (int i = 0; i < 400; ++i) {
        const Features x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        xs.push_back(x);
        ys.push_back(1.5 * x[0] - 0.8 * x[1] + 2.0);
    }
    NnConfig cfg;
    cfg.epochs = 150;
    cfg.rng_seed = 10;
    const auto result = train_nn(xs, ys, cfg);
    double rmse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = result.model.predict(xs[i]) - ys[i];
        rmse += e * e;
    }
    rmse = std::sqrt(rmse / static_cast<double>(xs.size()));
    CHECK(rmse < 0.2);
}

TEST_CASE("same seed, same model") {
    Rng rng(77);
    std::vector<Features> xs;
    std::vector<double> ys;
    for (int i = 0; i < 64; ++i) {
        xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        ys.push_back(rng.normal(0, 1));
    }
    NnConfig cfg;
    cfg.epochs = 20;
    cfg.rng_seed = 123;
    CHECK(train_nn(xs, ys, cfg).model == train_nn(xs, ys, cfg).model);
}

TEST_CASE("exploding learning rate raises DivergedLoss") {
    Rng rng(13);
    std::vector<Features> xs;
    std::vector<double> ys;
    for (int i = 0; i < 64; ++i) {
        xs.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
        ys.push_back(rng.normal(0, 3));
    }
    NnConfig cfg;
    cfg.learning_rate = 1e9;
    cfg.epochs = 50;
    cfg.rng_seed = 1;
    try {
        train_nn(xs, ys, cfg);
        FAIL("expected DivergedLoss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DivergedLoss);
    }
}
