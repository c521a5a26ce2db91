#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/kernels.hpp"
#include "ftm/ml/normalizer.hpp"
#include "ftm/rng.hpp"

namespace ftm::ml {

namespace detail {

/// In-place lower Cholesky of a dense SPD matrix (row-major). Returns
/// false when a pivot is not strictly positive.
inline bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(sum > 0.0)) return false;  // also rejects NaN
                a[i * n + j] = std::sqrt(sum);
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    return true;
}

/// Solves L L' x = b given the Cholesky factor from above.
inline std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n,
                                          std::vector<double> b) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * n + k] * b[k];
        b[i] /= l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= l[k * n + i] * b[k];
        b[i] /= l[i * n + i];
    }
    return b;
}

}  // namespace detail

struct GpSolution {
    std::vector<Features> inputs;
    std::vector<double> weights;  // (K + noise^2 I)^{-1} y
    KernelParams kernel;

    double predict(const Features& x) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            sum += weights[i] * kernel_value(kernel, inputs[i], x);
        }
        return sum;
    }
};

/// Exact GP regression mean predictor. The kernel matrix gets
/// noise_sigma^2 on the diagonal; if factorization still fails the jitter
/// escalates a few decades before giving up.
inline GpSolution fit_gp(std::vector<Features> xs, std::vector<double> ys, KernelParams kernel) {
    kernel.check();
    if (xs.size() != ys.size() || xs.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "xs/ys empty or length mismatch");
    }
    const std::size_t n = xs.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernel_value(kernel, xs[i], xs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    const double noise_var = kernel.noise_sigma * kernel.noise_sigma;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 7; ++attempt) {
        std::vector<double> a = k;
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] += noise_var + jitter;
        if (detail::cholesky(a, n)) {
            GpSolution sol;
            sol.kernel = kernel;
            sol.weights = detail::cholesky_solve(a, n, ys);
            sol.inputs = std::move(xs);
            return sol;
        }
        jitter = jitter == 0.0 ? 1e-10 * kernel.sigma_f * kernel.sigma_f : jitter * 100.0;
    }
    throw Error(ErrorCode::FactorizationFailed, "kernel matrix not SPD after jitter escalation");
}

/// Deterministic subsample keeping the cubic solve bounded.
inline void subsample_for_gp(std::vector<Features>& xs, std::vector<double>& ys,
                             std::size_t max_points, std::uint64_t seed) {
    if (xs.size() <= max_points) return;
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(max_points);
    std::sort(order.begin(), order.end());
    std::vector<Features> sx;
    std::vector<double> sy;
    sx.reserve(max_points);
    sy.reserve(max_points);
    for (std::size_t i : order) {
        sx.push_back(xs[i]);
        sy.push_back(ys[i]);
    }
    xs = std::move(sx);
    ys = std::move(sy);
}

}  // namespace ftm::ml
