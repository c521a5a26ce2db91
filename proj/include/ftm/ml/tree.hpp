#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/normalizer.hpp"

namespace ftm::ml {

/// Flat CART node. feature == -1 marks a leaf and `value` its prediction;
/// inner nodes route x[feature] < threshold to `left`, otherwise `right`.
struct TreeNode {
    std::int8_t feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
    std::vector<TreeNode> nodes;  // pre-order, root at 0
    int min_leaf_size = 4;

    bool operator==(const TreeParams&) const = default;
};

inline double tree_predict(const TreeParams& tree, const Features& x) {
    std::size_t at = 0;
    while (tree.nodes[at].feature >= 0) {
        const auto& n = tree.nodes[at];
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold
                                          ? n.left
                                          : n.right);
    }
    return tree.nodes[at].value;
}

namespace detail {

struct BestSplit {
    bool found = false;
    int feature = 0;
    double threshold = 0.0;
    double reduction = 0.0;
    std::size_t position = 0;  // split index within the sorted order
};

/// Greedy CART growth. Candidate thresholds are midpoints between
/// consecutive distinct sorted values; the winner is the largest
/// sum-of-squared-error reduction. Ties resolve toward the lower feature
/// index and then the smaller threshold; two splits count as tied when
/// their reductions differ by less than 1e-9 of the node SSE, so
/// mathematically equal candidates (e.g. two features inducing the same
/// partition) cannot be separated by summation rounding. A node becomes a
/// leaf when its labels are constant or no split keeps both children at
/// min_leaf_size while reducing the SSE beyond the tie band.
class TreeGrower {
public:
    TreeGrower(const std::vector<Features>& xs, const std::vector<double>& ys, int min_leaf)
        : xs_(xs), ys_(ys), min_leaf_(static_cast<std::size_t>(min_leaf)) {}

    std::vector<TreeNode> grow() {
        std::vector<std::size_t> all(ys_.size());
        std::iota(all.begin(), all.end(), 0);
        grow_node(std::move(all));
        return std::move(nodes_);
    }

private:
    std::size_t grow_node(std::vector<std::size_t> indices) {
        const std::size_t self = nodes_.size();
        nodes_.emplace_back();

        double sum = 0.0;
        double sumsq = 0.0;
        double y_min = ys_[indices.front()];
        double y_max = y_min;
        for (std::size_t i : indices) {
            sum += ys_[i];
            sumsq += ys_[i] * ys_[i];
            y_min = std::min(y_min, ys_[i]);
            y_max = std::max(y_max, ys_[i]);
        }
        const auto n = static_cast<double>(indices.size());
        const double node_sse = sumsq - sum * sum / n;
        nodes_[self].value = sum / n;
        if (y_min == y_max) return self;  // constant labels: leaf, exactly

        const double tie_band = 1e-9 * node_sse;
        BestSplit best;
        std::vector<std::size_t> sorted = indices;
        std::vector<std::size_t> best_order;
        for (int f = 0; f < 2; ++f) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return xs_[a][static_cast<std::size_t>(f)] < xs_[b][static_cast<std::size_t>(f)];
            });
            double left_sum = 0.0;
            double left_sumsq = 0.0;
            for (std::size_t p = 1; p < sorted.size(); ++p) {
                const double y = ys_[sorted[p - 1]];
                left_sum += y;
                left_sumsq += y * y;
                const double lo = xs_[sorted[p - 1]][static_cast<std::size_t>(f)];
                const double hi = xs_[sorted[p]][static_cast<std::size_t>(f)];
                if (!(lo < hi)) continue;
                if (p < min_leaf_ || sorted.size() - p < min_leaf_) continue;
                const auto nl = static_cast<double>(p);
                const auto nr = static_cast<double>(sorted.size() - p);
                const double right_sum = sum - left_sum;
                const double right_sumsq = sumsq - left_sumsq;
                const double sse_l = left_sumsq - left_sum * left_sum / nl;
                const double sse_r = right_sumsq - right_sum * right_sum / nr;
                const double reduction = node_sse - sse_l - sse_r;
                if (reduction <= tie_band) continue;
                if (!best.found || reduction > best.reduction + tie_band) {
                    best = {true, f, 0.5 * (lo + hi), reduction, p};
                    best_order = sorted;
                }
            }
        }

        if (!best.found) return self;  // leaf

        std::vector<std::size_t> left(best_order.begin(),
                                      best_order.begin() + static_cast<std::ptrdiff_t>(best.position));
        std::vector<std::size_t> right(best_order.begin() + static_cast<std::ptrdiff_t>(best.position),
                                       best_order.end());
        nodes_[self].feature = static_cast<std::int8_t>(best.feature);
        nodes_[self].threshold = best.threshold;
        nodes_[self].left = static_cast<std::int32_t>(grow_node(std::move(left)));
        nodes_[self].right = static_cast<std::int32_t>(grow_node(std::move(right)));
        return self;
    }

    const std::vector<Features>& xs_;
    const std::vector<double>& ys_;
    std::size_t min_leaf_;
    std::vector<TreeNode> nodes_;
};

}  // namespace detail

inline TreeParams grow_tree(const std::vector<Features>& xs, const std::vector<double>& ys,
                            int min_leaf_size = 4) {
    if (min_leaf_size < 1) throw Error(ErrorCode::InvalidArgument, "min_leaf_size must be >= 1");
    if (xs.size() != ys.size()) throw Error(ErrorCode::DimensionMismatch, "xs/ys length mismatch");
    if (ys.size() < 2 * static_cast<std::size_t>(min_leaf_size)) {
        throw Error(ErrorCode::TooFewSamples, "need at least 2*min_leaf_size samples");
    }
    TreeParams params;
    params.min_leaf_size = min_leaf_size;
    params.nodes = detail::TreeGrower(xs, ys, min_leaf_size).grow();
    return params;
}

}  // namespace ftm::ml
