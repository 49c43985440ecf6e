#pragma once

// Dense kernels shared by the clustering modules: a row-major matrix,
// the validated data matrix, p-norm distances and a cyclic Jacobi
// eigensolver for small symmetric matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gfcsd/error.hpp"

namespace gfcsd {

/// Row-major dense matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("matrix storage size " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(rows_) + "x" +
                                 std::to_string(cols_));
    }
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// N x n observations, one row per point. Immutable once constructed.
class DataMatrix {
public:
    explicit DataMatrix(Matrix values) : m_(std::move(values)) {
        if (m_.rows() == 0 || m_.cols() == 0)
            throw InvalidArgument("data matrix must have at least one row and one column");
        for (std::size_t k = 0; k < m_.rows(); ++k)
            for (std::size_t d = 0; d < m_.cols(); ++d)
                if (!std::isfinite(m_(k, d)))
                    throw InvalidArgument("non-finite value at row " + std::to_string(k) +
                                          ", column " + std::to_string(d));
    }
    DataMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : DataMatrix(Matrix(rows)) {}

    std::size_t points() const noexcept { return m_.rows(); }
    std::size_t dim() const noexcept { return m_.cols(); }
    std::span<const double> point(std::size_t k) const noexcept { return m_.row(k); }
    double operator()(std::size_t k, std::size_t d) const noexcept { return m_(k, d); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// Square matrix with exactly mirrored off-diagonal entries.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t n) : m_(n, n, 0.0) {}

    /// Accepts a square matrix whose asymmetry is at round-off level and
    /// stores the averaged (exactly symmetric) version.
    explicit SymmetricMatrix(const Matrix& m) : m_(m) {
        if (m.rows() != m.cols())
            throw DimensionError("symmetric matrix must be square, got " +
                                 std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        double scale = 0.0;
        for (double v : m.values()) scale = std::max(scale, std::abs(v));
        const std::size_t n = m.rows();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double a = m(i, j), b = m(j, i);
                if (std::abs(a - b) > 1e-12 * scale)
                    throw InvalidArgument("matrix is not symmetric at (" + std::to_string(i) +
                                          "," + std::to_string(j) + ")");
                m_(i, j) = m_(j, i) = 0.5 * (a + b);
            }
    }
    SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SymmetricMatrix(Matrix(rows)) {}

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

    /// Writes both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double v) noexcept { m_(i, j) = m_(j, i) = v; }
    void add(std::size_t i, std::size_t j, double v) noexcept {
        m_(i, j) += v;
        if (i != j) m_(j, i) += v;
    }

    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// Eigenvalues sorted non-increasing; row s of `vectors` is the unit
/// eigenvector paired with values[s].
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;

    std::span<const double> vector(std::size_t s) const noexcept { return vectors.row(s); }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot: length " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
    return s;
}

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("distance: length " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

/// Sum_d |x_d - v_d|^p, i.e. the p-th power of the p-norm distance.
inline double pnorm_dist(std::span<const double> x, std::span<const double> v, double p) {
    if (x.size() != v.size())
        throw DimensionError("pnorm_dist: length " + std::to_string(x.size()) + " vs " +
                             std::to_string(v.size()));
    if (!(p >= 1.0)) throw InvalidArgument("pnorm_dist: p must be >= 1");
    if (p == 2.0) return squared_euclidean(x, v);
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double a = std::abs(x[d] - v[d]);
        s += p == 1.0 ? a : std::pow(a, p);
    }
    return s;
}

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
}

// Flip so the first component that is clearly nonzero is positive.
inline void canonical_sign(std::span<double> v) {
    for (double x : v) {
        if (std::abs(x) > 1e-10) {
            if (x < 0)
                for (double& y : v) y = -y;
            return;
        }
    }
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
/// Frobenius norm falls below 1e-12 of the matrix norm; throws
/// ConvergenceError after 100 sweeps.
inline EigenDecomposition sym_eig(const SymmetricMatrix& m) {
    constexpr double kTolerance = 1e-12;
    constexpr int kMaxSweeps = 100;

    const std::size_t n = m.dim();
    Matrix a = m.matrix();
    double frob = 0.0;
    for (double v : a.values()) {
        if (!std::isfinite(v)) throw InvalidArgument("sym_eig: non-finite matrix entry");
        frob += v * v;
    }
    frob = std::sqrt(frob);

    // Columns of `q` accumulate the rotations.
    Matrix q(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (detail::off_diagonal_norm(a) <= kTolerance * frob) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apr = a(p, r);
                if (apr == 0.0) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akr = a(k, r);
                    a(k, p) = c * akp - s * akr;
                    a(k, r) = s * akp + c * akr;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), ark = a(r, k);
                    a(p, k) = c * apk - s * ark;
                    a(r, k) = s * apk + c * ark;
                }
                a(p, r) = a(r, p) = 0.0;

                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p), qkr = q(k, r);
                    q(k, p) = c * qkp - s * qkr;
                    q(k, r) = s * qkp + c * qkr;
                }
            }
        }
    }
    if (!converged && detail::off_diagonal_norm(a) > kTolerance * frob)
        throw ConvergenceError("sym_eig: no convergence after 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t s = 0; s < n; ++s) {
        out.values[s] = a(order[s], order[s]);
        auto v = out.vectors.row(s);
        for (std::size_t k = 0; k < n; ++k) v[k] = q(k, order[s]);
        detail::canonical_sign(v);
    }
    return out;
}

}  // namespace gfcsd
