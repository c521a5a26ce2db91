#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/gp.hpp"
#include "ftm/ml/model.hpp"
#include "ftm/ml/split.hpp"
#include "ftm/rng.hpp"

namespace ftm::ml {

/// One searchable hyperparameter dimension.
struct ParamRange {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
    bool integer = false;
};

struct HyperSpace {
    std::vector<ParamRange> dims;

    static HyperSpace defaults(Variant v) {
        switch (v) {
            case Variant::Tree: return {{{"min_leaf_size", 2, 64, true, true}}};
            case Variant::Svr: return {{{"C", 0.1, 100, true, false}, {"epsilon", 0.01, 1, true, false}}};
            case Variant::Gp:
                return {{{"sigma_f", 0.1, 10, true, false},
                         {"sigma_l", 0.05, 5, true, false},
                         {"noise_sigma", 0.01, 1, true, false}}};
            case Variant::Nn: return {{{"learning_rate", 1e-4, 1e-2, true, false}}};
        }
        return {};
    }
};

enum class SearchStrategy { Random, Grid, Surrogate };

inline SearchStrategy search_strategy_from_name(const std::string& name) {
    if (name == "random") return SearchStrategy::Random;
    if (name == "grid") return SearchStrategy::Grid;
    if (name == "surrogate") return SearchStrategy::Surrogate;
    throw Error(ErrorCode::InvalidArgument, "unknown search strategy: " + name);
}

using Candidate = std::vector<double>;  // aligned with HyperSpace::dims

/// Writes a named hyperparameter into the training configuration.
inline void apply_hyperparameter(TrainingConfig& cfg, const std::string& name, double value) {
    if (name == "min_leaf_size") {
        cfg.tree_min_leaf = static_cast<int>(std::llround(value));
    } else if (name == "C") {
        cfg.svr.C = value;
    } else if (name == "epsilon") {
        cfg.svr.epsilon = value;
    } else if (name == "sigma_f") {
        cfg.gp_kernel.sigma_f = value;
    } else if (name == "sigma_l") {
        cfg.gp_kernel.sigma_l = value;
    } else if (name == "noise_sigma") {
        cfg.gp_kernel.noise_sigma = value;
    } else if (name == "learning_rate") {
        cfg.nn.learning_rate = value;
    } else if (name == "epochs") {
        cfg.nn.epochs = static_cast<int>(std::llround(value));
    } else if (name == "hidden") {
        cfg.nn.hidden = static_cast<int>(std::llround(value));
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown hyperparameter: " + name);
    }
}

struct CvEvaluation {
    Candidate candidate;
    double mean_rmse = 0.0;
};

struct CvResult {
    std::map<std::string, double> best_params;
    double best_rmse = std::numeric_limits<double>::infinity();
    std::vector<CvEvaluation> evaluations;
};

namespace detail {

inline double dim_to_value(const ParamRange& d, double unit) {
    double v = d.log_scale ? std::exp(std::log(d.lo) + unit * (std::log(d.hi) - std::log(d.lo)))
                           : d.lo + unit * (d.hi - d.lo);
    if (d.integer) v = std::llround(v);
    return std::clamp(v, d.lo, d.hi);
}

inline double value_to_unit(const ParamRange& d, double v) {
    if (d.log_scale) return (std::log(v) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo));
    return (v - d.lo) / (d.hi - d.lo);
}

inline Candidate random_candidate(const HyperSpace& space, Rng& rng) {
    Candidate c;
    c.reserve(space.dims.size());
    for (const auto& d : space.dims) c.push_back(dim_to_value(d, rng.uniform()));
    return c;
}

inline std::vector<Candidate> grid_candidates(const HyperSpace& space, int budget) {
    const auto dims = space.dims.size();
    int per_dim = std::max(
        1, static_cast<int>(std::floor(std::pow(static_cast<double>(budget),
                                                1.0 / static_cast<double>(dims)))));
    std::vector<Candidate> out;
    Candidate current(dims);
    const auto recurse = [&](auto&& self, std::size_t depth) -> void {
        if (static_cast<int>(out.size()) >= budget) return;
        if (depth == dims) {
            out.push_back(current);
            return;
        }
        for (int i = 0; i < per_dim; ++i) {
            const double unit = per_dim == 1 ? 0.5
                                             : static_cast<double>(i) /
                                                   static_cast<double>(per_dim - 1);
            current[depth] = dim_to_value(space.dims[depth], unit);
            self(self, depth + 1);
        }
    };
    recurse(recurse, 0);
    return out;
}

}  // namespace detail

/// Mean k-fold RMSE of the configuration over the given samples.
/// Candidates whose training fails (non-convergence, degenerate folds)
/// score infinity instead of aborting the search.
inline double cv_score(const std::vector<LabeledSample>& samples, const TrainingConfig& cfg,
                       int folds, std::uint64_t seed) {
    const auto fold_sets = fold_indices(samples.size(), folds, seed);
    double total = 0.0;
    int used = 0;
    for (std::size_t f = 0; f < fold_sets.size(); ++f) {
        if (fold_sets[f].empty()) continue;
        std::vector<LabeledSample> train;
        std::vector<LabeledSample> val;
        train.reserve(samples.size());
        for (std::size_t g = 0; g < fold_sets.size(); ++g) {
            for (std::size_t idx : fold_sets[g]) (g == f ? val : train).push_back(samples[idx]);
        }
        TrainingConfig fold_cfg = cfg;
        fold_cfg.nn.rng_seed = Rng(seed).derive(f).seed();
        fold_cfg.gp_subsample_seed = fold_cfg.nn.rng_seed;
        try {
            const TrainedModel model = train_model(train, fold_cfg);
            total += rmse(model, val);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        ++used;
    }
    return used > 0 ? total / used : std::numeric_limits<double>::infinity();
}

/// Hyperparameter search over the space with k-fold scoring. Strategies:
/// seeded random sampling (default), a coarse grid, or surrogate-assisted
/// selection that fits a GP to the scores seen so far and greedily picks
/// the pool candidate with the lowest posterior mean. The first evaluated
/// minimizer wins ties.
inline CvResult cross_validate(const std::vector<LabeledSample>& samples, Variant variant,
                               const HyperSpace& space, int folds = 5, int budget = 50,
                               std::uint64_t seed = 1,
                               SearchStrategy strategy = SearchStrategy::Random,
                               TrainingConfig base = {}) {
    if (space.dims.empty()) throw Error(ErrorCode::EmptySearchSpace, "no hyperparameters to search");
    if (budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
    if (samples.size() < static_cast<std::size_t>(folds)) {
        throw Error(ErrorCode::TooFewSamples, "need at least `folds` samples");
    }

    base.variant = variant;
    Rng rng(seed);
    const std::uint64_t fold_seed = Rng(seed).derive(0xf01d).seed();

    CvResult result;
    const auto evaluate = [&](const Candidate& c) {
        TrainingConfig cfg = base;
        for (std::size_t d = 0; d < space.dims.size(); ++d) {
            apply_hyperparameter(cfg, space.dims[d].name, c[d]);
        }
        const double score = cv_score(samples, cfg, folds, fold_seed);
        result.evaluations.push_back({c, score});
        if (score < result.best_rmse) {
            result.best_rmse = score;
            result.best_params.clear();
            for (std::size_t d = 0; d < space.dims.size(); ++d) {
                result.best_params[space.dims[d].name] = c[d];
            }
        }
    };

    if (strategy == SearchStrategy::Grid) {
        for (const auto& c : detail::grid_candidates(space, budget)) evaluate(c);
    } else if (strategy == SearchStrategy::Random) {
        for (int b = 0; b < budget; ++b) evaluate(detail::random_candidate(space, rng));
    } else {
        const int warmup = std::min(budget, std::max(4, budget / 4));
        for (int b = 0; b < warmup; ++b) evaluate(detail::random_candidate(space, rng));
        for (int b = warmup; b < budget; ++b) {
            std::vector<Features> unit_points;
            std::vector<double> scores;
            for (const auto& e : result.evaluations) {
                if (!std::isfinite(e.mean_rmse)) continue;
                Features u{0.0, 0.0};
                for (std::size_t d = 0; d < std::min<std::size_t>(2, space.dims.size()); ++d) {
                    u[d] = detail::value_to_unit(space.dims[d], e.candidate[d]);
                }
                unit_points.push_back(u);
                scores.push_back(e.mean_rmse);
            }
            if (unit_points.size() < 2) {
                evaluate(detail::random_candidate(space, rng));
                continue;
            }
            // Surrogate over the (at most two) leading dimensions, scores
            // centered so the zero-mean prior extrapolates sensibly.
            double center = 0.0;
            for (double s : scores) center += s;
            center /= static_cast<double>(scores.size());
            for (double& s : scores) s -= center;
            KernelParams surrogate_kernel{KernelKind::Exponential, 1.0, 0.3, 0.05};
            GpSolution surrogate;
            try {
                surrogate = fit_gp(unit_points, scores, surrogate_kernel);
            } catch (const Error&) {
                evaluate(detail::random_candidate(space, rng));
                continue;
            }
            Candidate best_pool;
            double best_mean = std::numeric_limits<double>::infinity();
            for (int p = 0; p < 128; ++p) {
                Candidate c = detail::random_candidate(space, rng);
                Features u{0.0, 0.0};
                for (std::size_t d = 0; d < std::min<std::size_t>(2, space.dims.size()); ++d) {
                    u[d] = detail::value_to_unit(space.dims[d], c[d]);
                }
                const double mean = surrogate.predict(u);
                if (mean < best_mean) {
                    best_mean = mean;
                    best_pool = std::move(c);
                }
            }
            evaluate(best_pool);
        }
    }
    return result;
}

}  // namespace ftm::ml
