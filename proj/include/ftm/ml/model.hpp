#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ftm/core.hpp"
#include "ftm/correction.hpp"
#include "ftm/errors.hpp"
#include "ftm/ml/gp.hpp"
#include "ftm/ml/kernels.hpp"
#include "ftm/ml/nn.hpp"
#include "ftm/ml/normalizer.hpp"
#include "ftm/ml/svr.hpp"
#include "ftm/ml/tree.hpp"

namespace ftm::ml {

enum class Variant { Tree, Svr, Gp, Nn };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Tree: return "tree";
        case Variant::Svr: return "svr";
        case Variant::Gp: return "gp";
        case Variant::Nn: return "nn";
    }
    return "tree";
}

inline Variant variant_from_name(const std::string& name) {
    if (name == "tree") return Variant::Tree;
    if (name == "svr") return Variant::Svr;
    if (name == "gp") return Variant::Gp;
    if (name == "nn") return Variant::Nn;
    throw Error(ErrorCode::UnsupportedVariant, "unknown variant: " + name);
}

/// Affine target coding, optionally on the residual against the plain
/// rtt-to-distance conversion instead of the absolute distance. The
/// kernel/network variants train on z-scored targets; the tree keeps raw
/// meters so leaves read as distances.
struct TargetTransform {
    double mean = 0.0;
    double std = 1.0;
    bool correction_mode = false;

    bool operator==(const TargetTransform&) const = default;

    double encode(double distance_m, double rtt_raw_ns) const {
        const double base = correction_mode ? distance_from_rtt(rtt_raw_ns) : 0.0;
        return (distance_m - base - mean) / std;
    }

    double decode(double coded, double rtt_raw_ns) const {
        const double base = correction_mode ? distance_from_rtt(rtt_raw_ns) : 0.0;
        return coded * std + mean + base;
    }
};

struct SvrParams {
    double C = 10.0;
    double epsilon = 0.1;
    SvrSolution solution;
};

struct GpParams {
    GpSolution solution;
};

struct NnParams {
    NnModel net;
    double validation_loss = 0.0;
};

/// A trained estimator plus everything prediction needs frozen at
/// training time. Immutable after construction; predict() is reentrant.
struct TrainedModel {
    Variant variant = Variant::Tree;
    Normalizer normalizer;
    TargetTransform target;
    std::variant<TreeParams, SvrParams, GpParams, NnParams> params;
};

/// All training knobs in one place so cross-validation can vary them
/// uniformly.
struct TrainingConfig {
    Variant variant = Variant::Tree;
    bool correction_mode = false;
    int tree_min_leaf = 4;
    SvrConfig svr{};
    KernelParams gp_kernel{};
    std::size_t gp_max_points = 2000;
    std::uint64_t gp_subsample_seed = 1;
    NnConfig nn{};
};

namespace detail {

inline TargetTransform fit_target_transform(const std::vector<LabeledSample>& samples,
                                            bool correction_mode, bool standardize) {
    TargetTransform t;
    t.correction_mode = correction_mode;
    if (!standardize) return t;
    const auto residual = [&](const LabeledSample& s) {
        return correction_mode ? s.true_distance_m - distance_from_rtt(s.rtt_raw_ns)
                               : s.true_distance_m;
    };
    double sum = 0.0;
    for (const auto& s : samples) sum += residual(s);
    t.mean = sum / static_cast<double>(samples.size());
    double sq = 0.0;
    for (const auto& s : samples) sq += (residual(s) - t.mean) * (residual(s) - t.mean);
    const double var = sq / static_cast<double>(samples.size() - 1);
    t.std = var > 0.0 ? std::sqrt(var) : 1.0;
    return t;
}

}  // namespace detail

inline TrainedModel train_model(const std::vector<LabeledSample>& train,
                                const TrainingConfig& cfg) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "need >= 2 training samples");

    TrainedModel model;
    model.variant = cfg.variant;
    model.normalizer = fit_normalizer(train);
    const bool standardize_target = cfg.variant != Variant::Tree;
    model.target = detail::fit_target_transform(train, cfg.correction_mode, standardize_target);

    const std::vector<Features> xs = normalize_all(model.normalizer, train);
    std::vector<double> ys;
    ys.reserve(train.size());
    for (const auto& s : train) ys.push_back(model.target.encode(s.true_distance_m, s.rtt_raw_ns));

    switch (cfg.variant) {
        case Variant::Tree:
            model.params = grow_tree(xs, ys, cfg.tree_min_leaf);
            break;
        case Variant::Svr: {
            SvrParams p;
            p.C = cfg.svr.C;
            p.epsilon = cfg.svr.epsilon;
            p.solution = solve_svr(xs, ys, cfg.svr);
            model.params = std::move(p);
            break;
        }
        case Variant::Gp: {
            std::vector<Features> gx = xs;
            std::vector<double> gy = ys;
            subsample_for_gp(gx, gy, cfg.gp_max_points, cfg.gp_subsample_seed);
            model.params = GpParams{fit_gp(std::move(gx), std::move(gy), cfg.gp_kernel)};
            break;
        }
        case Variant::Nn: {
            auto result = train_nn(xs, ys, cfg.nn);
            model.params = NnParams{std::move(result.model), result.validation_loss};
            break;
        }
    }
    return model;
}

/// Normalizes with the frozen parameters, evaluates the variant, decodes
/// the target and clamps at zero meters.
inline double predict(const TrainedModel& model, double rtt_raw_ns, double mean_rssi_dbm) {
    const Features x = model.normalizer.apply({rtt_raw_ns, mean_rssi_dbm});
    double coded = 0.0;
    switch (model.variant) {
        case Variant::Tree: coded = tree_predict(std::get<TreeParams>(model.params), x); break;
        case Variant::Svr: coded = std::get<SvrParams>(model.params).solution.predict(x); break;
        case Variant::Gp: coded = std::get<GpParams>(model.params).solution.predict(x); break;
        case Variant::Nn: coded = std::get<NnParams>(model.params).net.predict(x); break;
    }
    return std::max(0.0, model.target.decode(coded, rtt_raw_ns));
}

inline double predict(const TrainedModel& model, const LabeledSample& s) {
    return predict(model, s.rtt_raw_ns, s.mean_rssi_dbm);
}

// Named entry points mirroring the four estimators.

inline TrainedModel train_tree(const std::vector<LabeledSample>& train, int min_leaf_size = 4,
                               bool correction_mode = false) {
    TrainingConfig cfg;
    cfg.variant = Variant::Tree;
    cfg.tree_min_leaf = min_leaf_size;
    cfg.correction_mode = correction_mode;
    return train_model(train, cfg);
}

inline TrainedModel train_svr(const std::vector<LabeledSample>& train, double C = 10.0,
                              double epsilon = 0.1, bool correction_mode = false) {
    TrainingConfig cfg;
    cfg.variant = Variant::Svr;
    cfg.svr.C = C;
    cfg.svr.epsilon = epsilon;
    cfg.correction_mode = correction_mode;
    return train_model(train, cfg);
}

inline TrainedModel train_gp(const std::vector<LabeledSample>& train, KernelParams kernel = {},
                             std::size_t max_points = 2000, std::uint64_t subsample_seed = 1,
                             bool correction_mode = false) {
    TrainingConfig cfg;
    cfg.variant = Variant::Gp;
    cfg.gp_kernel = kernel;
    cfg.gp_max_points = max_points;
    cfg.gp_subsample_seed = subsample_seed;
    cfg.correction_mode = correction_mode;
    return train_model(train, cfg);
}

inline TrainedModel train_nn(const std::vector<LabeledSample>& train, const NnConfig& nn_cfg = {},
                             bool correction_mode = false) {
    TrainingConfig cfg;
    cfg.variant = Variant::Nn;
    cfg.nn = nn_cfg;
    cfg.correction_mode = correction_mode;
    return train_model(train, cfg);
}

inline double rmse(const TrainedModel& model, const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "rmse over empty sample set");
    double sq = 0.0;
    for (const auto& s : samples) {
        const double err = predict(model, s) - s.true_distance_m;
        sq += err * err;
    }
    return std::sqrt(sq / static_cast<double>(samples.size()));
}

}  // namespace ftm::ml
