#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gfcsd/engine.hpp"
#include "gfcsd/error.hpp"
#include "gfcsd/linalg.hpp"

namespace gfcsd {

/// Xie-Beni compactness/separation index with the membership exponent fixed
/// at 2. Lower is better; coincident prototypes give +inf.
inline double xie_beni(const DataMatrix& x, const MembershipMatrix& u, const Matrix& prototypes) {
    const std::size_t c = prototypes.rows();
    if (c < 2) throw InvalidArgument("xie_beni: need at least two clusters");
    if (u.clusters() != c || u.points() != x.points() || prototypes.cols() != x.dim())
        throw DimensionError("xie_beni: shape mismatch");

    double compact = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t k = 0; k < x.points(); ++k) {
            const double mu = u(i, k);
            if (mu == 0.0) continue;
            compact += mu * mu * squared_euclidean(x.point(k), prototypes.row(i));
        }
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j)
            min_sep = std::min(min_sep, squared_euclidean(prototypes.row(i), prototypes.row(j)));
    if (min_sep == 0.0) return std::numeric_limits<double>::infinity();
    return compact / (static_cast<double>(x.points()) * min_sep);
}

/// Rows are true classes, columns predicted clusters after alignment. The
/// matrix is square with side max(#classes, #clusters).
struct ConfusionMatrix {
    std::vector<std::vector<long>> counts;

    std::size_t size() const noexcept { return counts.size(); }
    long total() const {
        long t = 0;
        for (const auto& r : counts)
            for (long v : r) t += v;
        return t;
    }
    long trace() const {
        long t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }
};

struct AlignmentScore {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    /// cluster_for_class[i] = predicted label aligned with class i (or -1).
    std::vector<int> cluster_for_class;
};

/// Maximum-weight perfect assignment on a square matrix (Hungarian method,
/// O(n^3)). Returns col_of_row.
inline std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& w) {
    const std::size_t n = w.size();
    if (n == 0) return {};
    // Minimize cost = -w with the classic potentials formulation (1-based).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pu(n + 1, 0.0), pv(n + 1, 0.0), way_min(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(way_min.begin(), way_min.end(), inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -w[i0 - 1][j - 1] - pu[i0] - pv[j];
                if (cur < way_min[j]) {
                    way_min[j] = cur;
                    way[j] = j0;
                }
                if (way_min[j] < delta) {
                    delta = way_min[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    pu[match[j]] += delta;
                    pv[j] -= delta;
                } else {
                    way_min[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> col_of_row(n);
    for (std::size_t j = 1; j <= n; ++j) col_of_row[match[j] - 1] = j - 1;
    return col_of_row;
}

/// Aligns predicted cluster labels to true class labels so that the number
/// of agreements is maximal, and reports the confusion matrix and accuracy.
/// Labels are arbitrary integers; they are ranked in ascending order.
inline AlignmentScore align_and_score(const std::vector<int>& predicted,
                                      const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw DimensionError("align_and_score: " + std::to_string(predicted.size()) +
                             " predictions vs " + std::to_string(truth.size()) + " labels");
    if (truth.empty()) throw InvalidArgument("align_and_score: no labels");

    std::map<int, std::size_t> cls, clu;
    for (int t : truth) cls.emplace(t, 0);
    for (int p : predicted) clu.emplace(p, 0);
    std::size_t idx = 0;
    for (auto& [_, v] : cls) v = idx++;
    idx = 0;
    for (auto& [_, v] : clu) v = idx++;

    const std::size_t side = std::max(cls.size(), clu.size());
    std::vector<std::vector<double>> overlap(side, std::vector<double>(side, 0.0));
    for (std::size_t k = 0; k < truth.size(); ++k)
        overlap[cls[truth[k]]][clu[predicted[k]]] += 1.0;

    const auto col_of_row = max_weight_assignment(overlap);

    AlignmentScore out;
    out.confusion.counts.assign(side, std::vector<long>(side, 0));
    std::vector<int> cluster_label(side, -1);
    for (const auto& [label, j] : clu) cluster_label[j] = label;
    out.cluster_for_class.assign(cls.size(), -1);
    // Column i of the confusion matrix holds the cluster aligned with class i.
    for (std::size_t i = 0; i < side; ++i) {
        const std::size_t j = col_of_row[i];
        for (std::size_t row = 0; row < side; ++row)
            out.confusion.counts[row][i] = static_cast<long>(overlap[row][j]);
        if (i < cls.size()) out.cluster_for_class[i] = cluster_label[j];
    }
    out.accuracy = static_cast<double>(out.confusion.trace()) / static_cast<double>(truth.size());
    return out;
}

}  // namespace gfcsd
