#pragma once

// Alternating optimization of the generalized fuzzy objective
//
//   J = sum_i sum_k mu_ik^m * ( |x_k - V_i|_p^p + g * D_r(x_k, V_i) )
//
//   D_r = |x_k - V_i|^2 - sum_s (s_is . (x_k - V_i))^2
//
// D_r is the squared distance from x_k to the affine subspace spanned by the
// cluster's r leading scatter eigenvectors s_is through V_i, so points are
// cheaper along the principal directions. r is picked per cluster by MDL.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gfcsd/error.hpp"
#include "gfcsd/linalg.hpp"
#include "gfcsd/rank_selection.hpp"

namespace gfcsd {

struct EngineConfig {
    double m = 2.0;          ///< fuzziness, > 1
    double p = 2.0;          ///< norm order; fitting supports p = 2 only
    double g = 0.5;          ///< principal-axis weight in [0, 1]
    double epsilon = 1e-3;   ///< stop when max |U_new - U| < epsilon
    std::size_t max_iters = 300;
    std::size_t r1 = 1;      ///< minimum number of principal axes

    void validate() const {
        if (!(m > 1.0) || !std::isfinite(m)) throw InvalidArgument("m must be > 1");
        if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("p must be >= 1");
        if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("g must lie in [0, 1]");
        if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
        if (max_iters == 0) throw InvalidArgument("max_iters must be positive");
        if (r1 == 0) throw InvalidArgument("r1 must be >= 1");
    }
};

/// c x N fuzzy partition: entries in [0,1], every column sums to one and
/// every cluster holds some membership mass.
class MembershipMatrix {
public:
    static constexpr double kSumTolerance = 1e-9;

    explicit MembershipMatrix(Matrix values) : m_(std::move(values)) {
        if (m_.rows() == 0 || m_.cols() == 0)
            throw InvalidArgument("membership matrix must be non-empty");
        for (std::size_t k = 0; k < m_.cols(); ++k) {
            double col = 0.0;
            for (std::size_t i = 0; i < m_.rows(); ++i) {
                const double v = m_(i, k);
                if (!(v >= 0.0 && v <= 1.0 + kSumTolerance))
                    throw InvalidArgument("membership (" + std::to_string(i) + "," +
                                          std::to_string(k) + ") outside [0,1]");
                col += v;
            }
            if (std::abs(col - 1.0) > kSumTolerance)
                throw InvalidArgument("memberships of point " + std::to_string(k) +
                                      " sum to " + std::to_string(col));
        }
        // The upper bound sum_k mu_ik < N cannot hold for a single cluster,
        // which is a legitimate end state of merging, so only the lower bound
        // is enforced.
        for (std::size_t i = 0; i < m_.rows(); ++i) {
            double row = 0.0;
            for (double v : m_.row(i)) row += v;
            if (!(row > 0.0))
                throw InvalidArgument("cluster " + std::to_string(i) + " has no membership mass");
        }
    }

    std::size_t clusters() const noexcept { return m_.rows(); }
    std::size_t points() const noexcept { return m_.cols(); }
    double operator()(std::size_t i, std::size_t k) const noexcept { return m_(i, k); }
    std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
    const Matrix& matrix() const noexcept { return m_; }

    /// Largest entrywise absolute difference.
    double max_abs_diff(const MembershipMatrix& other) const {
        if (other.clusters() != clusters() || other.points() != points())
            throw DimensionError("membership shape mismatch");
        double d = 0.0;
        const auto a = m_.values(), b = other.m_.values();
        for (std::size_t t = 0; t < a.size(); ++t) d = std::max(d, std::abs(a[t] - b[t]));
        return d;
    }

    /// Crisp labels; ties go to the lowest cluster index.
    std::vector<int> argmax_labels() const {
        std::vector<int> out(points());
        for (std::size_t k = 0; k < points(); ++k) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < clusters(); ++i)
                if (m_(i, k) > m_(best, k)) best = i;
            out[k] = static_cast<int>(best);
        }
        return out;
    }

private:
    Matrix m_;
};

/// Principal directions of one cluster, one unit vector per row.
class Axes {
public:
    Axes() = default;
    explicit Axes(Matrix directions) : dirs_(std::move(directions)) {}

    std::size_t rank() const noexcept { return dirs_.rows(); }
    std::span<const double> direction(std::size_t s) const noexcept { return dirs_.row(s); }
    const Matrix& directions() const noexcept { return dirs_; }

private:
    Matrix dirs_;
};

/// Random fuzzy partition: uniform (0,1) entries, columns normalized.
inline MembershipMatrix random_memberships(std::size_t c, std::size_t n_points,
                                           std::mt19937_64& rng) {
    if (c == 0 || n_points == 0) throw InvalidArgument("random_memberships: empty shape");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix u(c, n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        double col = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            double v = 0.0;
            while (v == 0.0) v = unif(rng);
            u(i, k) = v;
            col += v;
        }
        for (std::size_t i = 0; i < c; ++i) u(i, k) /= col;
    }
    return MembershipMatrix(std::move(u));
}

/// E_i = sum_k mu_ik^m (x_k - V_i)(x_k - V_i)^T.
inline SymmetricMatrix scatter_matrix(const DataMatrix& x, std::span<const double> mu,
                                      std::span<const double> prototype, double m) {
    if (mu.size() != x.points())
        throw DimensionError("scatter_matrix: " + std::to_string(mu.size()) +
                             " memberships for " + std::to_string(x.points()) + " points");
    if (prototype.size() != x.dim())
        throw DimensionError("scatter_matrix: prototype dimension mismatch");
    const std::size_t n = x.dim();
    Matrix e(n, n, 0.0);
    std::vector<double> diff(n);
    for (std::size_t k = 0; k < x.points(); ++k) {
        const double w = std::pow(mu[k], m);
        if (w == 0.0) continue;
        const auto xk = x.point(k);
        for (std::size_t d = 0; d < n; ++d) diff[d] = xk[d] - prototype[d];
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) e(a, b) += w * diff[a] * diff[b];
    }
    SymmetricMatrix out(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) out.set(a, b, e(a, b));
    return out;
}

/// Squared distance from x to the affine subspace through `prototype`
/// spanned by `axes`. Without axes this is the squared Euclidean distance.
inline double subspace_residual(std::span<const double> x, std::span<const double> prototype,
                                const Axes& axes) {
    if (axes.rank() > 0 && axes.directions().cols() != x.size())
        throw DimensionError("subspace_residual: axes dimension mismatch");
    double r = squared_euclidean(x, prototype);
    for (std::size_t s = 0; s < axes.rank(); ++s) {
        const auto dir = axes.direction(s);
        double proj = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) proj += dir[d] * (x[d] - prototype[d]);
        r -= proj * proj;
    }
    return std::max(0.0, r);
}

/// D_p + g * D_r. With g = 0 this is exactly pnorm_dist.
inline double composite_distance(std::span<const double> x, std::span<const double> prototype,
                                 const Axes& axes, double p, double g) {
    const double dp = pnorm_dist(x, prototype, p);
    if (g == 0.0) return dp;
    return dp + g * subspace_residual(x, prototype, axes);
}

namespace detail {

inline void check_shapes(const DataMatrix& x, const Matrix& prototypes,
                         std::span<const Axes> axes) {
    if (prototypes.cols() != x.dim())
        throw DimensionError("prototype dimension " + std::to_string(prototypes.cols()) +
                             " vs data dimension " + std::to_string(x.dim()));
    if (!axes.empty() && axes.size() != prototypes.rows())
        throw DimensionError("axes given for " + std::to_string(axes.size()) + " of " +
                             std::to_string(prototypes.rows()) + " clusters");
}

inline const Axes& axes_or_empty(std::span<const Axes> axes, std::size_t i) {
    static const Axes none;
    return axes.empty() ? none : axes[i];
}

}  // namespace detail

/// J_{m,p}(U, V; X). An empty `axes` span means no cluster has axes.
inline double objective_value(const DataMatrix& x, const MembershipMatrix& u,
                              const Matrix& prototypes, std::span<const Axes> axes,
                              const EngineConfig& cfg) {
    detail::check_shapes(x, prototypes, axes);
    if (u.clusters() != prototypes.rows() || u.points() != x.points())
        throw DimensionError("objective_value: membership shape mismatch");
    double j = 0.0;
    for (std::size_t i = 0; i < u.clusters(); ++i) {
        const Axes& ax = detail::axes_or_empty(axes, i);
        for (std::size_t k = 0; k < x.points(); ++k) {
            const double w = std::pow(u(i, k), cfg.m);
            if (w == 0.0) continue;
            j += w * composite_distance(x.point(k), prototypes.row(i), ax, cfg.p, cfg.g);
        }
    }
    return j;
}

/// Closed-form membership update for fixed prototypes and axes. Points that
/// coincide with one or more prototypes are split evenly among them.
inline MembershipMatrix update_memberships(const DataMatrix& x, const Matrix& prototypes,
                                           std::span<const Axes> axes,
                                           const EngineConfig& cfg) {
    const std::size_t c = prototypes.rows();
    if (c == 0) throw InvalidArgument("update_memberships: no prototypes");
    detail::check_shapes(x, prototypes, axes);

    const double expo = 1.0 / (cfg.m - 1.0);
    Matrix u(c, x.points());
    std::vector<double> dist(c);
    for (std::size_t k = 0; k < x.points(); ++k) {
        std::size_t zeros = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c; ++i) {
            dist[i] = composite_distance(x.point(k), prototypes.row(i),
                                         detail::axes_or_empty(axes, i), cfg.p, cfg.g);
            if (dist[i] == 0.0) ++zeros;
            dmin = std::min(dmin, dist[i]);
        }
        if (zeros > 0) {
            const double share = 1.0 / static_cast<double>(zeros);
            for (std::size_t i = 0; i < c; ++i) u(i, k) = dist[i] == 0.0 ? share : 0.0;
            continue;
        }
        // mu_ik = w_i / sum_j w_j with w_i = (dmin / D_ik)^(1/(m-1)) in (0, 1].
        double total = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            const double ratio = dmin / dist[i];
            const double w = expo == 1.0 ? ratio : std::pow(ratio, expo);
            u(i, k) = w;
            total += w;
        }
        for (std::size_t i = 0; i < c; ++i) u(i, k) /= total;
    }
    return MembershipMatrix(std::move(u));
}

/// Weighted means V_i = sum_k mu_ik^m x_k / sum_k mu_ik^m. For p = 2 and
/// axes held fixed the distance is the quadratic form of
/// (1 + g) I - g S S^T, which is positive definite, so the weighted mean is
/// also the minimizer of J over V.
inline Matrix update_prototypes(const DataMatrix& x, const MembershipMatrix& u,
                                const EngineConfig& cfg) {
    if (u.points() != x.points())
        throw DimensionError("update_prototypes: membership shape mismatch");
    if (cfg.p != 2.0) throw InvalidArgument("prototype update supports p = 2 only");
    const std::size_t n = x.dim();
    Matrix v(u.clusters(), n, 0.0);
    for (std::size_t i = 0; i < u.clusters(); ++i) {
        double wsum = 0.0;
        auto vi = v.row(i);
        for (std::size_t k = 0; k < x.points(); ++k) {
            const double w = std::pow(u(i, k), cfg.m);
            if (w == 0.0) continue;
            wsum += w;
            const auto xk = x.point(k);
            for (std::size_t d = 0; d < n; ++d) vi[d] += w * xk[d];
        }
        if (!(wsum > 0.0)) throw DegenerateClusterError(0, i);
        for (double& val : vi) val /= wsum;
    }
    return v;
}

struct AxesSelection {
    Axes axes;
    std::vector<double> eigenvalues;
};

/// Leading eigenvectors of the cluster's scatter matrix, count chosen by MDL
/// with the fuzzy cardinality as sample count. One-dimensional data has no
/// admissible rank and yields empty axes.
inline AxesSelection select_axes(const DataMatrix& x, std::span<const double> mu,
                                 std::span<const double> prototype, double m, std::size_t r1) {
    const std::size_t n = x.dim();
    const auto eig = sym_eig(scatter_matrix(x, mu, prototype, m));
    if (n < 2) return {Axes{}, eig.values};
    double card = 0.0;
    for (double v : mu) card += v;
    const Spectrum spec(eig.values, effective_samples(card));
    const std::size_t r = select_rank(spec, std::min(r1, n - 1));
    Matrix dirs(r, n);
    for (std::size_t s = 0; s < r; ++s) std::ranges::copy(eig.vector(s), dirs.row(s).begin());
    return {Axes(std::move(dirs)), eig.values};
}

struct FitResult {
    MembershipMatrix memberships;
    Matrix prototypes;
    std::vector<Axes> axes;
    std::vector<double> objective_history;
    std::size_t iterations = 0;
    bool converged = false;

    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        r.reserve(axes.size());
        for (const auto& a : axes) r.push_back(a.rank());
        return r;
    }
};

/// Runs the alternating updates from `initial`: prototypes from U, axes from
/// the scatter matrices, then U from the composite distances, until the
/// largest membership change drops below epsilon or max_iters is reached.
/// When `warm_prototypes` is given it replaces the first prototype update.
/// Axes are only computed when g > 0.
inline FitResult gfc_fit(const DataMatrix& x, const MembershipMatrix& initial,
                         const EngineConfig& cfg,
                         std::optional<Matrix> warm_prototypes = std::nullopt) {
    cfg.validate();
    if (cfg.p != 2.0) throw InvalidArgument("fitting supports p = 2 only");
    if (initial.points() != x.points())
        throw DimensionError("gfc_fit: initial memberships cover " +
                             std::to_string(initial.points()) + " points, data has " +
                             std::to_string(x.points()));
    if (warm_prototypes &&
        (warm_prototypes->rows() != initial.clusters() || warm_prototypes->cols() != x.dim()))
        throw DimensionError("gfc_fit: warm-start prototypes have the wrong shape");

    const std::size_t c = initial.clusters();
    MembershipMatrix u = initial;
    Matrix v;
    std::vector<Axes> axes;
    std::vector<double> history;

    std::size_t iter = 0;
    bool converged = false;
    while (iter < cfg.max_iters) {
        ++iter;
        if (iter == 1 && warm_prototypes) {
            v = std::move(*warm_prototypes);
        } else {
            try {
                v = update_prototypes(x, u, cfg);
            } catch (const DegenerateClusterError& e) {
                throw DegenerateClusterError(iter, e.cluster());
            }
        }

        axes.clear();
        if (cfg.g > 0.0) {
            axes.reserve(c);
            for (std::size_t i = 0; i < c; ++i)
                axes.push_back(select_axes(x, u.row(i), v.row(i), cfg.m, cfg.r1).axes);
        }

        MembershipMatrix next = update_memberships(x, v, axes, cfg);
        const double delta = next.max_abs_diff(u);
        u = std::move(next);
        history.push_back(objective_value(x, u, v, axes, cfg));
        if (delta < cfg.epsilon) {
            converged = true;
            break;
        }
    }
    return {std::move(u), std::move(v), std::move(axes), std::move(history), iter, converged};
}

}  // namespace gfcsd
