#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/kernels.hpp"
#include "ftm/ml/normalizer.hpp"

namespace ftm::ml {

struct SvrConfig {
    double C = 10.0;
    double epsilon = 0.1;  // tube half-width, in (normalized) target units
    double tol = 1e-3;     // KKT stopping tolerance
    std::size_t max_iterations = 500'000;
    KernelParams kernel{KernelKind::Gaussian, 1.0, 1.0, 0.0};

    void check() const {
        if (C <= 0) throw Error(ErrorCode::InvalidArgument, "C must be > 0");
        if (epsilon < 0) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
    }
};

struct SvrSolution {
    std::vector<Features> support_vectors;
    std::vector<double> coefficients;  // beta_i = alpha_i - alpha_i^*, in [-C, C]
    double bias = 0.0;
    double kkt_violation = 0.0;  // max violating pair gap at termination
    std::size_t iterations = 0;
    KernelParams kernel;

    double predict(const Features& x) const {
        double sum = bias;
        for (std::size_t i = 0; i < support_vectors.size(); ++i) {
            sum += coefficients[i] * kernel_value(kernel, support_vectors[i], x);
        }
        return sum;
    }
};

namespace detail {

/// FIFO-evicting cache of kernel matrix rows.
class KernelRowCache {
public:
    KernelRowCache(const std::vector<Features>& xs, const KernelParams& p,
                   std::size_t budget_bytes = 128u << 20)
        : xs_(xs), params_(p), rows_(xs.size()) {
        cap_ = std::max<std::size_t>(16, budget_bytes / (sizeof(double) * std::max<std::size_t>(1, xs.size())));
    }

    const std::vector<double>& row(std::size_t i) {
        if (!rows_[i].empty()) return rows_[i];
        if (resident_.size() >= cap_) {
            rows_[resident_.front()].clear();
            rows_[resident_.front()].shrink_to_fit();
            resident_.erase(resident_.begin());
        }
        auto& r = rows_[i];
        r.resize(xs_.size());
        for (std::size_t j = 0; j < xs_.size(); ++j) r[j] = kernel_value(params_, xs_[i], xs_[j]);
        resident_.push_back(i);
        return r;
    }

private:
    const std::vector<Features>& xs_;
    KernelParams params_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::size_t> resident_;
    std::size_t cap_;
};

}  // namespace detail

/// Epsilon-insensitive SVR trained by SMO-style coordinate ascent on the
/// 2n-variable dual (maximal-violating-pair selection), following the
/// classic decomposition scheme. Terminates when the KKT gap drops below
/// cfg.tol.
inline SvrSolution solve_svr(const std::vector<Features>& xs, const std::vector<double>& ys,
                             const SvrConfig& cfg) {
    cfg.check();
    if (xs.size() != ys.size() || xs.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "xs/ys empty or length mismatch");
    }
    const std::size_t n = xs.size();
    const std::size_t m = 2 * n;  // [0,n): alpha+, [n,2n): alpha-
    const double C = cfg.C;

    const auto sign_of = [n](std::size_t s) { return s < n ? 1.0 : -1.0; };

    std::vector<double> alpha(m, 0.0);
    std::vector<double> grad(m);
    for (std::size_t s = 0; s < m; ++s) {
        grad[s] = s < n ? cfg.epsilon - ys[s] : cfg.epsilon + ys[s - n];
    }

    detail::KernelRowCache cache(xs, cfg.kernel);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = kernel_value(cfg.kernel, xs[i], xs[i]);

    constexpr double kTau = 1e-12;
    double gap = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        // Maximal violating pair over I_up / I_low.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i = m;
        std::size_t j = m;
        for (std::size_t s = 0; s < m; ++s) {
            const double y = sign_of(s);
            const double score = -y * grad[s];
            const bool in_up = (y > 0 && alpha[s] < C) || (y < 0 && alpha[s] > 0);
            const bool in_low = (y > 0 && alpha[s] > 0) || (y < 0 && alpha[s] < C);
            if (in_up && score > up_best) {
                up_best = score;
                i = s;
            }
            if (in_low && score < low_best) {
                low_best = score;
                j = s;
            }
        }
        gap = up_best - low_best;
        if (gap < cfg.tol || i == m || j == m) break;

        const double yi = sign_of(i);
        const double yj = sign_of(j);
        const std::vector<double>& ki = cache.row(i % n);
        const std::vector<double>& kj = cache.row(j % n);
        const double kij = ki[j % n];
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        if (yi != yj) {
            double quad = diag[i % n] + diag[j % n] + 2.0 * kij * yi * yj;
            // Q_ij = yi*yj*K_ij, and the pair moves along (1, 1) in (ai, aj)
            quad = std::max(quad, kTau);
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = C + diff;
                }
            }
        } else {
            double quad = diag[i % n] + diag[j % n] - 2.0 * kij * yi * yj;
            quad = std::max(quad, kTau);
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < m; ++t) {
            const double yt = sign_of(t);
            grad[t] += yt * (yi * di * ki[t % n] + yj * dj * kj[t % n]);
        }
    }
    if (iter >= cfg.max_iterations && gap >= cfg.tol) {
        throw Error(ErrorCode::NotConverged,
                    "SMO did not reach tol within " + std::to_string(cfg.max_iterations) +
                        " iterations",
                    static_cast<long>(cfg.max_iterations));
    }

    // Bias from the free variables' KKT conditions (bound midpoint fallback).
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t s = 0; s < m; ++s) {
        const double y = sign_of(s);
        const double yg = y * grad[s];
        if (alpha[s] >= C) {
            if (y < 0) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else if (alpha[s] <= 0) {
            if (y > 0) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                      : 0.5 * (upper + lower);

    SvrSolution sol;
    sol.kernel = cfg.kernel;
    sol.bias = -rho;
    sol.kkt_violation = std::max(gap, 0.0);
    sol.iterations = iter;
    for (std::size_t i2 = 0; i2 < n; ++i2) {
        const double beta = alpha[i2] - alpha[i2 + n];
        if (beta != 0.0) {
            sol.support_vectors.push_back(xs[i2]);
            sol.coefficients.push_back(beta);
        }
    }
    return sol;
}

/// Dual objective in beta form: 0.5*b'Kb - y'b + eps*||b||_1, useful for
/// comparing solver outputs.
inline double svr_dual_objective(const std::vector<Features>& xs, const std::vector<double>& ys,
                                 const SvrConfig& cfg, const std::vector<double>& beta) {
    double quad = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            quad += beta[i] * beta[j] * kernel_value(cfg.kernel, xs[i], xs[j]);
        }
    }
    double linear = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        linear += ys[i] * beta[i];
        l1 += std::abs(beta[i]);
    }
    return 0.5 * quad - linear + cfg.epsilon * l1;
}

}  // namespace ftm::ml
