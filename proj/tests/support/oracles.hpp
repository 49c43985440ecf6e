#pragma once

// Independent reference implementations used only by the tests. They share
// no code with the library beyond plain std types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

struct FcmState {
    Rows u;  // c x N
    Rows v;  // c x n
    int iterations = 0;
};

/// Textbook fuzzy c-means (Bezdek): prototypes from U, then
/// u_ik = 1 / sum_j (d_ik / d_jk)^(2/(m-1)) with Euclidean d, repeated until
/// the largest membership change is below eps.
inline FcmState textbook_fcm(const Rows& x, Rows u, double m, double eps, int max_iter) {
    const std::size_t c = u.size(), N = x.size(), n = x[0].size();
    Rows v(c, std::vector<double>(n));
    int it = 0;
    while (it < max_iter) {
        ++it;
        for (std::size_t i = 0; i < c; ++i) {
            double den = 0.0;
            std::fill(v[i].begin(), v[i].end(), 0.0);
            for (std::size_t k = 0; k < N; ++k) {
                const double w = std::pow(u[i][k], m);
                den += w;
                for (std::size_t d = 0; d < n; ++d) v[i][d] += w * x[k][d];
            }
            for (double& e : v[i]) e /= den;
        }
        Rows next(c, std::vector<double>(N));
        for (std::size_t k = 0; k < N; ++k) {
            std::vector<double> dist(c);
            for (std::size_t i = 0; i < c; ++i) {
                double s = 0.0;
                for (std::size_t d = 0; d < n; ++d) s += (x[k][d] - v[i][d]) * (x[k][d] - v[i][d]);
                dist[i] = std::sqrt(s);
            }
            for (std::size_t i = 0; i < c; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < c; ++j) s += std::pow(dist[i] / dist[j], 2.0 / (m - 1.0));
                next[i][k] = 1.0 / s;
            }
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t k = 0; k < N; ++k) delta = std::max(delta, std::abs(next[i][k] - u[i][k]));
        u = std::move(next);
        if (delta < eps) break;
    }
    return {std::move(u), std::move(v), it};
}

/// Straight double loop: sum_i sum_k u_ik^m |x_k - v_i|^2.
inline double fcm_objective(const Rows& x, const Rows& u, const Rows& v, double m) {
    double j = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            double s = 0.0;
            for (std::size_t d = 0; d < x[k].size(); ++d) s += (x[k][d] - v[i][d]) * (x[k][d] - v[i][d]);
            j += std::pow(u[i][k], m) * s;
        }
    return j;
}

struct EigenPairs {
    std::vector<double> values;  // descending
    Rows vectors;
};

/// Shifted power iteration with deflation; each eigenvalue is the Rayleigh
/// quotient of the converged vector against the original matrix.
inline EigenPairs power_deflation(Rows a) {
    const std::size_t n = a.size();
    const Rows original = a;
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < n; ++j) r += std::abs(a[i][j]);
        shift = std::max(shift, r);
    }
    for (std::size_t i = 0; i < n; ++i) a[i][i] += shift;  // now PSD

    EigenPairs out;
    for (std::size_t e = 0; e < n; ++e) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i * i + e);
        double lambda = 0.0;
        for (int it = 0; it < 500000; ++it) {
            std::vector<double> w(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) w[i] += a[i][j] * v[j];
            const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
            if (norm == 0.0) break;
            double change = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] /= norm;
                change = std::max(change, std::abs(w[i] - v[i]));
            }
            v = w;
            lambda = norm;
            if (change < 1e-15) break;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a[i][j] -= lambda * v[i] * v[j];
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) rq += v[i] * original[i][j] * v[j];
        out.values.push_back(rq);
        out.vectors.push_back(v);
    }
    return out;
}

/// Best label agreement over every permutation of predicted labels
/// (labels 0..side-1).
inline long brute_force_agreement(const std::vector<int>& pred, const std::vector<int>& truth,
                                  int side) {
    std::vector<int> perm(side);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hits = 0;
        for (std::size_t k = 0; k < pred.size(); ++k) hits += perm[pred[k]] == truth[k];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Disjoint-pair selection by enumeration: scan pairs in decreasing FR order
/// and accept those above the threshold whose clusters are still free.
inline std::vector<std::pair<int, int>> disjoint_merge_order(const Rows& fr, double threshold) {
    const int c = static_cast<int>(fr.size());
    std::vector<bool> used(c, false);
    std::vector<std::pair<int, int>> order;
    for (;;) {
        double best = threshold;
        std::pair<int, int> pick{-1, -1};
        for (int i = 0; i < c; ++i)
            for (int j = i + 1; j < c; ++j)
                if (!used[i] && !used[j] && fr[i][j] > best) {
                    best = fr[i][j];
                    pick = {i, j};
                }
        if (pick.first < 0) return order;
        used[pick.first] = used[pick.second] = true;
        order.push_back(pick);
    }
}

}  // namespace oracle
