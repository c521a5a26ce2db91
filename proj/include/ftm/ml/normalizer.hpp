#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ftm/core.hpp"
#include "ftm/errors.hpp"

namespace ftm::ml {

/// Normalized feature pair, order fixed as [rtt_raw_ns, mean_rssi_dbm].
using Features = std::array<double, 2>;

inline Features features_of(const LabeledSample& s) { return {s.rtt_raw_ns, s.mean_rssi_dbm}; }

/// Frozen per-feature z-score parameters (sample std, n-1 denominator).
struct Normalizer {
    std::array<double, 2> means{0.0, 0.0};
    std::array<double, 2> stds{1.0, 1.0};

    bool operator==(const Normalizer&) const = default;

    Features apply(const Features& x) const {
        return {(x[0] - means[0]) / stds[0], (x[1] - means[1]) / stds[1]};
    }
};

inline Normalizer fit_normalizer(const std::vector<LabeledSample>& samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::TooFewSamples, "normalizer needs >= 2 samples");
    }
    Normalizer n;
    const auto count = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        const auto x = features_of(s);
        n.means[0] += x[0];
        n.means[1] += x[1];
    }
    n.means[0] /= count;
    n.means[1] /= count;
    std::array<double, 2> sq{0.0, 0.0};
    for (const auto& s : samples) {
        const auto x = features_of(s);
        sq[0] += (x[0] - n.means[0]) * (x[0] - n.means[0]);
        sq[1] += (x[1] - n.means[1]) * (x[1] - n.means[1]);
    }
    for (std::size_t f = 0; f < 2; ++f) {
        n.stds[f] = std::sqrt(sq[f] / (count - 1.0));
        if (n.stds[f] <= 0.0) {
            throw Error(ErrorCode::ConstantFeature, "feature " + std::to_string(f) + " is constant",
                        static_cast<long>(f));
        }
    }
    return n;
}

inline std::vector<Features> normalize_all(const Normalizer& n,
                                           const std::vector<LabeledSample>& samples) {
    std::vector<Features> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(n.apply(features_of(s)));
    return out;
}

}  // namespace ftm::ml
