#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ftm/core.hpp"
#include "ftm/errors.hpp"
#include "ftm/rng.hpp"

namespace ftm::ml {

struct SplitSpec {
    double train_fraction = 0.70;
    int folds = 5;
    std::uint64_t rng_seed = 1;

    void check() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "train_fraction must be in (0,1)");
        }
        if (folds < 2) throw Error(ErrorCode::InvalidArgument, "folds must be >= 2");
    }
};

struct TrainTestSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
};

struct IndexSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// The one shuffling scheme behind every train/test partition: a seeded
/// Fisher-Yates pass, first round(fraction*n) shuffled indices to train.
inline IndexSplit split_indices(std::size_t n, double train_fraction, Rng rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    IndexSplit out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return out;
}

/// Source-stratified random split: round(train_fraction * n) samples from
/// each source go to the training set, the rest to the test set, then the
/// per-source parts are merged in source order. Each source shuffles its
/// own derived stream, so adding a source never reshuffles the others.
inline TrainTestSplit split(const std::vector<std::vector<LabeledSample>>& sources,
                            const SplitSpec& spec) {
    spec.check();
    TrainTestSplit out;
    const Rng root(spec.rng_seed);
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const auto& source = sources[s];
        if (source.empty()) {
            throw Error(ErrorCode::EmptySource, "source " + std::to_string(s) + " is empty",
                        static_cast<long>(s));
        }
        const auto idx = split_indices(source.size(), spec.train_fraction, root.derive(s));
        for (std::size_t i : idx.train) out.train.push_back(source[i]);
        for (std::size_t i : idx.test) out.test.push_back(source[i]);
    }
    return out;
}

inline TrainTestSplit split(const std::vector<LabeledSample>& samples, const SplitSpec& spec) {
    return split(std::vector<std::vector<LabeledSample>>{samples}, spec);
}

/// Fold assignment for k-fold cross-validation: a seeded shuffle cut into
/// k contiguous chunks; every index lands in exactly one validation fold.
inline std::vector<std::vector<std::size_t>> fold_indices(std::size_t n, int folds,
                                                          std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorCode::InvalidArgument, "folds must be >= 2");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < n; ++i) {
        out[i * static_cast<std::size_t>(folds) / n].push_back(order[i]);
    }
    return out;
}

}  // namespace ftm::ml
