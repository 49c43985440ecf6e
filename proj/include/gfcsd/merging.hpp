#pragma once

// Similarity-driven merging: the fuzzy similarity FR_ij = (dp_i + dp_j) / dv_ij,
// the thresholded merge pass and the fuzzy DB index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gfcsd/engine.hpp"
#include "gfcsd/error.hpp"
#include "gfcsd/linalg.hpp"

namespace gfcsd {

/// Prototypes plus the per-cluster state derived from a fit. `axes` and
/// `dispersions` may be empty when they have not been computed for the
/// current prototypes (e.g. right after a merge).
struct ClusterModel {
    Matrix prototypes;
    std::vector<Axes> axes;
    std::vector<double> dispersions;

    std::size_t clusters() const noexcept { return prototypes.rows(); }
};

/// c x c symmetric, non-negative, zero diagonal.
class SimilarityMatrix {
public:
    explicit SimilarityMatrix(std::size_t c) : m_(c, c, 0.0) {}

    std::size_t clusters() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    void set(std::size_t i, std::size_t j, double v) noexcept { m_(i, j) = m_(j, i) = v; }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

struct MergePolicy {
    double tau1 = 1.0;
    double tau2 = 2.0;
    double anneal_decay = 0.9;
    std::size_t max_outer_iters = 100;

    void validate() const {
        if (!(tau1 > 0.0 && tau1 <= tau2)) throw InvalidArgument("need 0 < tau1 <= tau2");
        if (!(anneal_decay > 0.0 && anneal_decay < 1.0))
            throw InvalidArgument("anneal_decay must lie in (0, 1)");
        if (max_outer_iters == 0) throw InvalidArgument("max_outer_iters must be positive");
    }

    /// max(tau1, tau2 * decay^step): non-increasing, floored at tau1.
    double effective_threshold(std::size_t step) const {
        return std::max(tau1, tau2 * std::pow(anneal_decay, static_cast<double>(step)));
    }
};

struct MergeEvent {
    std::size_t iteration = 0;
    std::size_t first = 0;   ///< surviving label (the smaller index)
    std::size_t second = 0;  ///< absorbed label
    double fr_value = 0.0;
    std::vector<double> new_prototype;
    double threshold_used = 0.0;
};

struct MergeResult {
    ClusterModel model;
    MembershipMatrix memberships;
    std::vector<MergeEvent> events;
};

/// Membership-weighted RMS radius:
/// sqrt( sum_k mu_k^m |x_k - V|^2 / sum_k mu_k^m ).
inline double fuzzy_dispersion(const DataMatrix& x, std::span<const double> mu,
                               std::span<const double> prototype, double m) {
    if (mu.size() != x.points())
        throw DimensionError("fuzzy_dispersion: membership length mismatch");
    if (prototype.size() != x.dim())
        throw DimensionError("fuzzy_dispersion: prototype dimension mismatch");
    double weight = 0.0, acc = 0.0;
    for (std::size_t k = 0; k < x.points(); ++k) {
        if (mu[k] == 0.0) continue;
        const double w = std::pow(mu[k], m);
        weight += w;
        acc += w * squared_euclidean(x.point(k), prototype);
    }
    if (!(weight > 0.0)) throw InvalidArgument("fuzzy_dispersion: empty cluster");
    return std::sqrt(acc / weight);
}

inline double dissimilarity(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_euclidean(a, b));
}

/// FR from dispersions and prototypes; coincident prototypes give +inf.
inline SimilarityMatrix similarity_matrix(std::span<const double> dispersions,
                                          const Matrix& prototypes) {
    const std::size_t c = prototypes.rows();
    if (c < 2) throw InvalidArgument("similarity_matrix: need at least two clusters");
    if (dispersions.size() != c)
        throw DimensionError("similarity_matrix: " + std::to_string(dispersions.size()) +
                             " dispersions for " + std::to_string(c) + " clusters");
    SimilarityMatrix fr(c);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            const double dv = dissimilarity(prototypes.row(i), prototypes.row(j));
            fr.set(i, j, dv == 0.0 ? std::numeric_limits<double>::infinity()
                                   : (dispersions[i] + dispersions[j]) / dv);
        }
    return fr;
}

/// Fills model.dispersions from (X, U) and returns FR.
inline SimilarityMatrix similarity_matrix(ClusterModel& model, const DataMatrix& x,
                                          const MembershipMatrix& u, double m) {
    if (u.clusters() != model.clusters())
        throw DimensionError("similarity_matrix: model/membership cluster count mismatch");
    model.dispersions.resize(model.clusters());
    for (std::size_t i = 0; i < model.clusters(); ++i)
        model.dispersions[i] = fuzzy_dispersion(x, u.row(i), model.prototypes.row(i), m);
    return similarity_matrix(model.dispersions, model.prototypes);
}

/// Mean over clusters of each cluster's largest similarity to another.
inline double fuzzy_db_index(const SimilarityMatrix& fr) {
    const std::size_t c = fr.clusters();
    if (c < 2) throw InvalidArgument("fuzzy_db_index: need at least two clusters");
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double row_max = 0.0;
        for (std::size_t j = 0; j < c; ++j)
            if (j != i) row_max = std::max(row_max, fr(i, j));
        total += row_max;
    }
    return total / static_cast<double>(c);
}

/// One merge pass at annealing step `step`. Candidate pairs are those with
/// FR above the effective threshold; they are taken in decreasing FR order,
/// skipping any pair that touches a cluster already merged in this pass.
/// Merged rows are summed, the prototype is the midpoint, and the merged
/// cluster keeps the smaller label. FR is not recomputed inside the pass.
inline MergeResult merge_pass(const ClusterModel& model, const MembershipMatrix& u,
                              const SimilarityMatrix& fr, const MergePolicy& policy,
                              std::size_t step) {
    const std::size_t c = model.clusters();
    if (fr.clusters() != c || u.clusters() != c)
        throw DimensionError("merge_pass: FR, model and memberships disagree on cluster count");
    const double threshold = policy.effective_threshold(step);

    struct Candidate {
        double fr;
        std::size_t i, j;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j)
            if (fr(i, j) > threshold) candidates.push_back({fr(i, j), i, j});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.fr > b.fr; });

    std::vector<bool> consumed(c, false);
    std::vector<std::size_t> partner(c, c);  // absorbed label for each survivor
    std::vector<MergeEvent> events;
    for (const auto& cand : candidates) {
        if (consumed[cand.i] || consumed[cand.j]) continue;
        consumed[cand.i] = consumed[cand.j] = true;
        partner[cand.i] = cand.j;
        MergeEvent ev;
        ev.iteration = step;
        ev.first = cand.i;
        ev.second = cand.j;
        ev.fr_value = cand.fr;
        ev.threshold_used = threshold;
        ev.new_prototype.resize(model.prototypes.cols());
        for (std::size_t d = 0; d < ev.new_prototype.size(); ++d)
            ev.new_prototype[d] = 0.5 * (model.prototypes(cand.i, d) + model.prototypes(cand.j, d));
        events.push_back(std::move(ev));
    }

    if (events.empty()) return {model, u, {}};

    const std::size_t c_new = c - events.size();
    const std::size_t n = model.prototypes.cols();
    Matrix protos(c_new, n);
    Matrix rows(c_new, u.points());
    std::size_t out = 0;
    for (std::size_t i = 0; i < c; ++i) {
        if (consumed[i] && partner[i] == c) continue;  // absorbed into a smaller label
        auto dst = rows.row(out);
        std::ranges::copy(u.row(i), dst.begin());
        if (partner[i] < c) {
            const auto other = u.row(partner[i]);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += other[k];
            for (std::size_t d = 0; d < n; ++d)
                protos(out, d) = 0.5 * (model.prototypes(i, d) + model.prototypes(partner[i], d));
        } else {
            std::ranges::copy(model.prototypes.row(i), protos.row(out).begin());
        }
        ++out;
    }
    return {ClusterModel{std::move(protos), {}, {}}, MembershipMatrix(std::move(rows)),
            std::move(events)};
}

}  // namespace gfcsd
