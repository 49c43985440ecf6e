#pragma once

// Minimum-description-length choice of how many principal axes a cluster
// keeps. A spectrum is the eigenvalue list of one cluster's scatter matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gfcsd/error.hpp"

namespace gfcsd {

class Spectrum {
public:
    /// Eigenvalues within this fraction of the largest magnitude are round-off
    /// and stored as exact zeros, whatever their sign.
    static constexpr double kZeroTolerance = 1e-10;

    /// `eigenvalues` must be sorted non-increasing. Clearly negative values
    /// are rejected.
    Spectrum(std::vector<double> eigenvalues, double samples)
        : values_(std::move(eigenvalues)), samples_(samples) {
        if (values_.empty()) throw InvalidArgument("spectrum: no eigenvalues");
        if (!(samples_ >= 1.0)) throw InvalidArgument("spectrum: sample count must be >= 1");
        double top = 0.0;
        for (double v : values_) {
            if (!std::isfinite(v)) throw InvalidArgument("spectrum: non-finite eigenvalue");
            top = std::max(top, std::abs(v));
        }
        for (std::size_t j = 1; j < values_.size(); ++j)
            if (values_[j] > values_[j - 1])
                throw InvalidArgument("spectrum: eigenvalues not sorted non-increasing");
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (std::abs(values_[j]) <= kZeroTolerance * top) {
                values_[j] = 0.0;
            } else if (values_[j] < 0.0) {
                throw InvalidArgument("spectrum: negative eigenvalue " +
                                      std::to_string(values_[j]));
            }
        }
    }

    std::size_t dim() const noexcept { return values_.size(); }
    double samples() const noexcept { return samples_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
    double samples_;
};

/// Sample count used for a cluster spectrum: the fuzzy cardinality rounded
/// to the nearest integer, floored at 2.
inline double effective_samples(double fuzzy_cardinality) {
    return std::max(2.0, std::round(fuzzy_cardinality));
}

/// Description length of keeping `j` axes (1 <= j <= n-1). Returns +inf
/// when any trailing eigenvalue is zero, since the geometric mean vanishes.
inline double mdl_score(const Spectrum& spec, std::size_t j) {
    const std::size_t n = spec.dim();
    if (j < 1 || j >= n)
        throw InvalidArgument("mdl_score: j=" + std::to_string(j) + " outside [1, " +
                              std::to_string(n == 0 ? 0 : n - 1) + "]");
    const auto& lambda = spec.values();
    const double N = spec.samples();
    const auto tail = static_cast<double>(n - j);

    double log_sum = 0.0, sum = 0.0;
    for (std::size_t s = j; s < n; ++s) {
        if (lambda[s] <= 0.0) return std::numeric_limits<double>::infinity();
        log_sum += std::log(lambda[s]);
        sum += lambda[s];
    }
    // ln(G/A) <= 0 by AM-GM; clamp the round-off side.
    const double log_ratio = std::min(0.0, log_sum / tail - std::log(sum / tail));
    const double jj = static_cast<double>(j);
    const double nn = static_cast<double>(n);
    return -tail * N * log_ratio + 0.5 * jj * (2.0 * nn - jj) * std::log(N);
}

/// argmin_j mdl_score over [r1, n-1]; ties go to the smaller j.
inline std::size_t select_rank(const Spectrum& spec, std::size_t r1 = 1) {
    const std::size_t n = spec.dim();
    if (n < 2) throw InvalidArgument("select_rank: need dimension >= 2");
    if (r1 < 1 || r1 > n - 1)
        throw InvalidArgument("select_rank: r1=" + std::to_string(r1) + " outside [1, " +
                              std::to_string(n - 1) + "]");
    std::size_t best = r1;
    double best_score = mdl_score(spec, r1);
    for (std::size_t j = r1 + 1; j < n; ++j) {
        const double s = mdl_score(spec, j);
        if (s < best_score) {
            best = j;
            best_score = s;
        }
    }
    return best;
}

}  // namespace gfcsd
