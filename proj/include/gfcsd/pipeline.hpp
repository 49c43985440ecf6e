#pragma once

// End-to-end drivers: GFC-SD (over-partition, fit, merge, refit until the
// partition is stable) and the static FCM + Xie-Beni sweep baseline.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gfcsd/engine.hpp"
#include "gfcsd/error.hpp"
#include "gfcsd/merging.hpp"
#include "gfcsd/validity.hpp"

namespace gfcsd {

struct GfcSdConfig {
    std::size_t c_max = 20;
    EngineConfig engine;
    MergePolicy policy;

    void validate(std::size_t n_points) const {
        engine.validate();
        policy.validate();
        if (c_max < 2) throw InvalidArgument("c_max must be >= 2");
        if (c_max >= n_points)
            throw InvalidArgument("c_max=" + std::to_string(c_max) +
                                  " must be smaller than the number of points (" +
                                  std::to_string(n_points) + ")");
    }
};

/// Diagnostics of one outer iteration (one fit followed by one merge decision).
struct TraceEntry {
    std::size_t iteration = 0;
    std::size_t clusters = 0;         ///< c of the fit, before merging
    double db_fr = std::numeric_limits<double>::quiet_NaN();  ///< NaN when c < 2
    double objective = 0.0;
    std::size_t fit_iterations = 0;
    std::vector<std::size_t> ranks;
    std::vector<MergeEvent> events;
    double threshold = 0.0;           ///< effective threshold of the deciding pass
    std::size_t anneal_step = 0;      ///< annealing step of the deciding pass
    double wall_time_s = 0.0;
};

struct GfcSdResult {
    ClusterModel model;
    MembershipMatrix memberships;
    std::vector<TraceEntry> trace;

    std::size_t final_clusters() const noexcept { return model.clusters(); }

    /// c of the trace entry with the smallest fuzzy DB index (0 if none).
    std::size_t db_optimal_clusters() const {
        std::size_t best = 0;
        double best_db = std::numeric_limits<double>::infinity();
        for (const auto& e : trace)
            if (!std::isnan(e.db_fr) && e.db_fr < best_db) {
                best_db = e.db_fr;
                best = e.clusters;
            }
        return best;
    }
};

/// Thrown when merging has not settled within max_outer_iters.
class MergeLimitError : public Error {
public:
    explicit MergeLimitError(std::vector<TraceEntry> trace)
        : Error("merging did not settle within " + std::to_string(trace.size()) +
                " outer iterations"),
          trace_(std::move(trace)) {}
    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

private:
    std::vector<TraceEntry> trace_;
};

/// Wraps an engine failure with the outer iteration it happened in.
class PipelineError : public Error {
public:
    PipelineError(std::size_t outer, const std::string& what)
        : Error("outer iteration " + std::to_string(outer) + ": " + what), outer_(outer) {}
    std::size_t outer_iteration() const noexcept { return outer_; }

private:
    std::size_t outer_;
};

/// Full GFC-SD run. Each outer iteration fits to convergence, computes FR
/// and runs merge passes. A pass that merges nothing while the annealed
/// threshold is still above tau1 lowers the threshold and is retried on the
/// same fit; the run stops once a pass at the floor tau1 merges nothing.
/// Merged memberships and prototypes warm-start the next fit.
inline GfcSdResult gfc_sd(const DataMatrix& x, const GfcSdConfig& cfg, std::uint64_t seed) {
    cfg.validate(x.points());
    using clock = std::chrono::steady_clock;

    std::mt19937_64 rng(seed);
    MembershipMatrix u = random_memberships(cfg.c_max, x.points(), rng);
    std::optional<Matrix> warm;
    std::vector<TraceEntry> trace;
    std::size_t step = 0;

    for (std::size_t outer = 0; outer < cfg.policy.max_outer_iters; ++outer) {
        const auto t0 = clock::now();
        FitResult fit = [&] {
            try {
                return gfc_fit(x, u, cfg.engine, std::move(warm));
            } catch (const Error& e) {
                throw PipelineError(outer, e.what());
            }
        }();
        warm.reset();

        TraceEntry entry;
        entry.iteration = outer;
        entry.clusters = fit.memberships.clusters();
        entry.objective = fit.objective_history.empty() ? 0.0 : fit.objective_history.back();
        entry.fit_iterations = fit.iterations;
        entry.ranks = fit.ranks();

        ClusterModel model{std::move(fit.prototypes), std::move(fit.axes), {}};
        if (model.clusters() < 2) {
            for (std::size_t i = 0; i < model.clusters(); ++i)
                model.dispersions.push_back(fuzzy_dispersion(
                    x, fit.memberships.row(i), model.prototypes.row(i), cfg.engine.m));
            entry.threshold = cfg.policy.effective_threshold(step);
            entry.anneal_step = step;
            entry.wall_time_s = std::chrono::duration<double>(clock::now() - t0).count();
            trace.push_back(std::move(entry));
            return {std::move(model), std::move(fit.memberships), std::move(trace)};
        }

        const SimilarityMatrix fr = similarity_matrix(model, x, fit.memberships, cfg.engine.m);
        entry.db_fr = fuzzy_db_index(fr);

        MergeResult merged{model, fit.memberships, {}};
        for (;;) {
            merged = merge_pass(model, fit.memberships, fr, cfg.policy, step);
            entry.threshold = cfg.policy.effective_threshold(step);
            entry.anneal_step = step;
            ++step;
            if (!merged.events.empty() || entry.threshold <= cfg.policy.tau1) break;
        }
        entry.events = std::move(merged.events);
        entry.wall_time_s = std::chrono::duration<double>(clock::now() - t0).count();
        const bool settled = entry.events.empty();
        trace.push_back(std::move(entry));

        if (settled) return {std::move(model), std::move(fit.memberships), std::move(trace)};

        u = std::move(merged.memberships);
        warm = std::move(merged.model.prototypes);
    }
    throw MergeLimitError(std::move(trace));
}

struct SweepResult {
    std::size_t best_clusters = 0;
    std::vector<std::pair<std::size_t, double>> curve;  ///< (c, Xie-Beni)
};

/// Seed for restart `restart` of the sweep run at cluster count `c`,
/// independent of run order.
inline std::mt19937_64 sweep_rng(std::uint64_t seed, std::size_t c, std::size_t restart = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(restart)};
    return std::mt19937_64(seq);
}

/// Plain FCM (g = 0, no merging) for every c in [c_min, c_max], scored with
/// Xie-Beni; returns the argmin (ties to the smaller c) and the curve. With
/// several restarts per c the fit with the lowest final objective is scored.
inline SweepResult fcm_xie_sweep(const DataMatrix& x, std::size_t c_min, std::size_t c_max,
                                 EngineConfig engine, std::uint64_t seed,
                                 std::size_t restarts = 1) {
    if (c_min < 2 || c_min > c_max || c_max >= x.points())
        throw InvalidArgument("sweep range [" + std::to_string(c_min) + ", " +
                              std::to_string(c_max) + "] must satisfy 2 <= c_min <= c_max < N");
    if (restarts == 0) throw InvalidArgument("sweep needs at least one restart");
    engine.g = 0.0;
    engine.validate();

    SweepResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = c_min; c <= c_max; ++c) {
        double xb = 0.0;
        try {
            std::optional<FitResult> best_fit;
            for (std::size_t r = 0; r < restarts; ++r) {
                auto rng = sweep_rng(seed, c, r);
                auto fit = gfc_fit(x, random_memberships(c, x.points(), rng), engine);
                if (!best_fit || fit.objective_history.back() < best_fit->objective_history.back())
                    best_fit = std::move(fit);
            }
            xb = xie_beni(x, best_fit->memberships, best_fit->prototypes);
        } catch (const Error& e) {
            throw Error("sweep at c=" + std::to_string(c) + ": " + e.what());
        }
        out.curve.emplace_back(c, xb);
        if (xb < best) {
            best = xb;
            out.best_clusters = c;
        }
    }
    if (out.best_clusters == 0) out.best_clusters = c_min;
    return out;
}

}  // namespace gfcsd
