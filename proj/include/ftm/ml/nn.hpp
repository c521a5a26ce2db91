#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/normalizer.hpp"
#include "ftm/rng.hpp"

namespace ftm::ml {

/// Fully connected 2 -> hidden -> 1 network, ReLU hidden layer, linear
/// output.
struct NnModel {
    int hidden = 100;
    std::vector<double> w1;  // hidden x 2, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;

    bool operator==(const NnModel&) const = default;

    double predict(const Features& x) const {
        double out = b2;
        for (int h = 0; h < hidden; ++h) {
            const auto hi = static_cast<std::size_t>(h);
            const double pre = w1[hi * 2] * x[0] + w1[hi * 2 + 1] * x[1] + b1[hi];
            if (pre > 0.0) out += w2[hi] * pre;
        }
        return out;
    }
};

struct NnConfig {
    int hidden = 100;
    int epochs = 200;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 32;
    int patience = 20;            // early-stopping epochs without improvement
    double validation_fraction = 0.15;
    std::uint64_t rng_seed = 1;

    void check() const {
        if (hidden < 1) throw Error(ErrorCode::InvalidArgument, "hidden must be >= 1");
        if (epochs < 1 || batch_size < 1) {
            throw Error(ErrorCode::InvalidArgument, "epochs and batch_size must be >= 1");
        }
    }
};

struct NnGradient {
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
};

/// Mean-squared-error loss and its analytic gradient over a batch;
/// separated out so the gradient can be checked against finite
/// differences.
inline double nn_loss_and_gradient(const NnModel& net, const std::vector<Features>& xs,
                                   const std::vector<double>& ys,
                                   const std::vector<std::size_t>& batch, NnGradient& grad) {
    const auto hidden = static_cast<std::size_t>(net.hidden);
    grad.w1.assign(hidden * 2, 0.0);
    grad.b1.assign(hidden, 0.0);
    grad.w2.assign(hidden, 0.0);
    grad.b2 = 0.0;

    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> act(hidden);
    for (std::size_t idx : batch) {
        const auto& x = xs[idx];
        double out = net.b2;
        for (std::size_t h = 0; h < hidden; ++h) {
            const double pre = net.w1[h * 2] * x[0] + net.w1[h * 2 + 1] * x[1] + net.b1[h];
            act[h] = pre > 0.0 ? pre : 0.0;
            out += net.w2[h] * act[h];
        }
        const double err = out - ys[idx];
        loss += err * err * scale;
        const double dout = 2.0 * err * scale;
        grad.b2 += dout;
        for (std::size_t h = 0; h < hidden; ++h) {
            grad.w2[h] += dout * act[h];
            if (act[h] > 0.0) {
                const double dpre = dout * net.w2[h];
                grad.w1[h * 2] += dpre * x[0];
                grad.w1[h * 2 + 1] += dpre * x[1];
                grad.b1[h] += dpre;
            }
        }
    }
    return loss;
}

struct NnTrainResult {
    NnModel model;
    double validation_loss = 0.0;
};

/// Mini-batch SGD with momentum and patience-based early stopping on an
/// internal validation slice; the best-validation weights are what the
/// caller gets back. The output layer starts at zero with b2 equal to the
/// mean label, so the untrained net predicts that constant.
inline NnTrainResult train_nn(const std::vector<Features>& xs, const std::vector<double>& ys,
                              const NnConfig& cfg) {
    cfg.check();
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, "need >= 2 samples");
    }

    Rng rng(cfg.rng_seed);
    const auto hidden = static_cast<std::size_t>(cfg.hidden);

    NnModel net;
    net.hidden = cfg.hidden;
    net.w1.resize(hidden * 2);
    net.b1.assign(hidden, 0.0);
    net.w2.assign(hidden, 0.0);
    for (auto& w : net.w1) w = rng.normal(0.0, 1.0);  // He init for 2 inputs
    net.b2 = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());

    // Deterministic validation slice.
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(xs.size())));
    n_val = std::min(n_val, xs.size() - 1);
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    const auto eval_loss = [&](const NnModel& m, const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        double loss = 0.0;
        for (std::size_t i : idx) {
            const double err = m.predict(xs[i]) - ys[i];
            loss += err * err;
        }
        return loss / static_cast<double>(idx.size());
    };

    NnGradient grad;
    NnGradient velocity;
    velocity.w1.assign(hidden * 2, 0.0);
    velocity.b1.assign(hidden, 0.0);
    velocity.w2.assign(hidden, 0.0);

    NnModel best = net;
    double best_val = eval_loss(net, val.empty() ? train : val);
    int stall = 0;

    std::vector<std::size_t> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train);
        for (std::size_t start = 0; start < train.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.assign(train.begin() + static_cast<std::ptrdiff_t>(start),
                         train.begin() + static_cast<std::ptrdiff_t>(end));
            const double loss = nn_loss_and_gradient(net, xs, ys, batch, grad);
            if (!std::isfinite(loss)) {
                throw Error(ErrorCode::DivergedLoss, "non-finite training loss");
            }
            for (std::size_t k = 0; k < net.w1.size(); ++k) {
                velocity.w1[k] = cfg.momentum * velocity.w1[k] - cfg.learning_rate * grad.w1[k];
                net.w1[k] += velocity.w1[k];
            }
            for (std::size_t k = 0; k < hidden; ++k) {
                velocity.b1[k] = cfg.momentum * velocity.b1[k] - cfg.learning_rate * grad.b1[k];
                net.b1[k] += velocity.b1[k];
                velocity.w2[k] = cfg.momentum * velocity.w2[k] - cfg.learning_rate * grad.w2[k];
                net.w2[k] += velocity.w2[k];
            }
            velocity.b2 = cfg.momentum * velocity.b2 - cfg.learning_rate * grad.b2;
            net.b2 += velocity.b2;
        }

        const double val_loss = eval_loss(net, val.empty() ? train : val);
        if (!std::isfinite(val_loss)) {
            throw Error(ErrorCode::DivergedLoss, "non-finite validation loss");
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            best = net;
            stall = 0;
        } else if (++stall > cfg.patience) {
            break;
        }
    }
    return {std::move(best), best_val};
}

}  // namespace ftm::ml
