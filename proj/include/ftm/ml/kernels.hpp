#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ftm/errors.hpp"
#include "ftm/ml/normalizer.hpp"

namespace ftm::ml {

enum class KernelKind { Gaussian, Exponential };

/// Kernel configuration. The Gaussian kernel is fixed-form
/// exp(-||xi-xj||^2); sigma_f/sigma_l parameterize the exponential kernel
/// sigma_f^2 * exp(-r/sigma_l); noise_sigma is the GP observation noise.
struct KernelParams {
    KernelKind kind = KernelKind::Exponential;
    double sigma_f = 4.6873;
    double sigma_l = 0.7051;
    double noise_sigma = 0.1;

    bool operator==(const KernelParams&) const = default;

    void check() const {
        if (kind == KernelKind::Exponential && (sigma_f <= 0 || sigma_l <= 0)) {
            throw Error(ErrorCode::InvalidArgument, "sigma_f and sigma_l must be > 0");
        }
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return sq;
}

/// k(xi, xj) = exp(-||xi - xj||^2); value in (0, 1].
inline double gaussian_kernel(std::span<const double> a, std::span<const double> b) {
    return std::exp(-squared_distance(a, b));
}

inline double gaussian_kernel(const Features& a, const Features& b) {
    return gaussian_kernel(std::span<const double>(a), std::span<const double>(b));
}

/// k(xi, xj) = sigma_f^2 * exp(-r / sigma_l) with r the Euclidean distance.
inline double exponential_kernel(std::span<const double> a, std::span<const double> b,
                                 const KernelParams& p) {
    p.check();
    return p.sigma_f * p.sigma_f * std::exp(-std::sqrt(squared_distance(a, b)) / p.sigma_l);
}

inline double exponential_kernel(const Features& a, const Features& b, const KernelParams& p) {
    return exponential_kernel(std::span<const double>(a), std::span<const double>(b), p);
}

inline double kernel_value(const KernelParams& p, std::span<const double> a,
                           std::span<const double> b) {
    return p.kind == KernelKind::Gaussian ? gaussian_kernel(a, b) : exponential_kernel(a, b, p);
}

inline double kernel_value(const KernelParams& p, const Features& a, const Features& b) {
    return kernel_value(p, std::span<const double>(a), std::span<const double>(b));
}

}  // namespace ftm::ml
