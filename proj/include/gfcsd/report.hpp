#pragma once

// JSON reports and membership CSV files.
//
// Fit report keys: format, command, seed, config, final_c, db_optimal_c,
// prototypes, dispersions, ranks, memberships_path, trace[], indices.
// Sweep report keys: format, command, seed, config, c_min, c_max, best_c,
// curve[], total_wall_time_s.
// Timing lives only in keys named *wall_time_s.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfcsd/data_io.hpp"
#include "gfcsd/engine.hpp"
#include "gfcsd/error.hpp"
#include "gfcsd/pipeline.hpp"
#include "gfcsd/validity.hpp"

namespace gfcsd {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportFormat = "gfcsd-report/1";

namespace detail {

// JSON has no NaN/Inf; they serialize as null and read back as NaN.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

}  // namespace detail

inline json config_to_json(const GfcSdConfig& cfg) {
    return {{"c_max", cfg.c_max},
            {"m", cfg.engine.m},
            {"p", cfg.engine.p},
            {"g", cfg.engine.g},
            {"epsilon", cfg.engine.epsilon},
            {"max_iters", cfg.engine.max_iters},
            {"r1", cfg.engine.r1},
            {"tau1", cfg.policy.tau1},
            {"tau2", cfg.policy.tau2},
            {"anneal_decay", cfg.policy.anneal_decay},
            {"max_outer_iters", cfg.policy.max_outer_iters}};
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline GfcSdConfig config_from_json(const json& j, GfcSdConfig base = {}) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    static const std::set<std::string> known{"c_max", "m",    "p",    "g",
                                             "epsilon", "max_iters", "r1", "tau1",
                                             "tau2", "anneal_decay", "max_outer_iters"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
    try {
        if (j.contains("c_max")) base.c_max = j["c_max"].get<std::size_t>();
        if (j.contains("m")) base.engine.m = j["m"].get<double>();
        if (j.contains("p")) base.engine.p = j["p"].get<double>();
        if (j.contains("g")) base.engine.g = j["g"].get<double>();
        if (j.contains("epsilon")) base.engine.epsilon = j["epsilon"].get<double>();
        if (j.contains("max_iters")) base.engine.max_iters = j["max_iters"].get<std::size_t>();
        if (j.contains("r1")) base.engine.r1 = j["r1"].get<std::size_t>();
        if (j.contains("tau1")) base.policy.tau1 = j["tau1"].get<double>();
        if (j.contains("tau2")) base.policy.tau2 = j["tau2"].get<double>();
        if (j.contains("anneal_decay")) base.policy.anneal_decay = j["anneal_decay"].get<double>();
        if (j.contains("max_outer_iters"))
            base.policy.max_outer_iters = j["max_outer_iters"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad config value: ") + e.what());
    }
    return base;
}

inline json trace_to_json(const std::vector<TraceEntry>& trace) {
    json out = json::array();
    for (const auto& e : trace) {
        json events = json::array();
        for (const auto& ev : e.events)
            events.push_back({{"pair", {ev.first, ev.second}},
                              {"fr", detail::number_or_null(ev.fr_value)},
                              {"threshold", ev.threshold_used},
                              {"anneal_step", ev.iteration},
                              {"new_prototype", ev.new_prototype}});
        out.push_back({{"iteration", e.iteration},
                       {"c", e.clusters},
                       {"db_fr", detail::number_or_null(e.db_fr)},
                       {"objective", e.objective},
                       {"fit_iterations", e.fit_iterations},
                       {"ranks", e.ranks},
                       {"threshold", e.threshold},
                       {"anneal_step", e.anneal_step},
                       {"events", std::move(events)},
                       {"wall_time_s", e.wall_time_s}});
    }
    return out;
}

inline json confusion_to_json(const AlignmentScore& score) {
    return {{"accuracy", score.accuracy}, {"confusion", score.confusion.counts}};
}

/// Report for a GFC-SD run. `score` is included when true labels were known.
inline json fit_report(const GfcSdResult& result, const DataMatrix& x, const GfcSdConfig& cfg,
                       std::uint64_t seed, const std::string& memberships_path,
                       const std::optional<AlignmentScore>& score = std::nullopt) {
    json indices = {{"db_fr_final", nullptr}, {"xie_beni", nullptr}};
    if (!result.trace.empty())
        indices["db_fr_final"] = detail::number_or_null(result.trace.back().db_fr);
    if (result.final_clusters() >= 2)
        indices["xie_beni"] = detail::number_or_null(
            xie_beni(x, result.memberships, result.model.prototypes));
    if (score) {
        indices["accuracy"] = score->accuracy;
        indices["confusion"] = score->confusion.counts;
    }
    std::vector<std::size_t> ranks;
    for (const auto& a : result.model.axes) ranks.push_back(a.rank());
    return {{"format", kReportFormat},
            {"command", "fit"},
            {"seed", seed},
            {"config", config_to_json(cfg)},
            {"final_c", result.final_clusters()},
            {"db_optimal_c", result.db_optimal_clusters()},
            {"prototypes", detail::matrix_rows(result.model.prototypes)},
            {"dispersions", result.model.dispersions},
            {"ranks", ranks},
            {"memberships_path", memberships_path},
            {"trace", trace_to_json(result.trace)},
            {"indices", std::move(indices)}};
}

inline json sweep_report(const SweepResult& sweep, const EngineConfig& engine, std::size_t c_min,
                         std::size_t c_max, std::uint64_t seed, double wall_time_s) {
    json curve = json::array();
    for (const auto& [c, xb] : sweep.curve)
        curve.push_back({{"c", c}, {"xie_beni", detail::number_or_null(xb)}});
    return {{"format", kReportFormat},
            {"command", "sweep"},
            {"seed", seed},
            {"config",
             {{"m", engine.m}, {"epsilon", engine.epsilon}, {"max_iters", engine.max_iters}}},
            {"c_min", c_min},
            {"c_max", c_max},
            {"best_c", sweep.best_clusters},
            {"curve", std::move(curve)},
            {"total_wall_time_s", wall_time_s}};
}

inline void write_report(const json& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << report.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline json read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

inline Matrix prototypes_from_report(const json& report) {
    const auto& rows = report.at("prototypes");
    if (!rows.is_array() || rows.empty()) throw IoError("report has no prototypes");
    const std::size_t c = rows.size(), n = rows[0].size();
    Matrix m(c, n);
    for (std::size_t i = 0; i < c; ++i) {
        if (rows[i].size() != n) throw IoError("ragged prototype rows in report");
        for (std::size_t d = 0; d < n; ++d) m(i, d) = rows[i][d].get<double>();
    }
    return m;
}

/// Copy of the report without timing keys, for reproducibility checks.
inline json strip_timing(json j) {
    if (j.is_object()) {
        json out = json::object();
        for (auto& [k, v] : j.items())
            if (k.find("wall_time_s") == std::string::npos) out[k] = strip_timing(v);
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (auto& v : j) out.push_back(strip_timing(v));
        return out;
    }
    return j;
}

/// N rows, c columns, header cluster_0..cluster_{c-1}, 17 significant digits.
inline void write_memberships_csv(const MembershipMatrix& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < u.clusters(); ++i) out << (i ? "," : "") << "cluster_" << i;
    out << '\n';
    out.precision(17);
    for (std::size_t k = 0; k < u.points(); ++k) {
        for (std::size_t i = 0; i < u.clusters(); ++i) out << (i ? "," : "") << u(i, k);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline MembershipMatrix read_memberships_csv(const std::string& path) {
    const auto table = load_csv(path, true);
    const auto& x = table.data;
    Matrix u(x.dim(), x.points());
    for (std::size_t k = 0; k < x.points(); ++k)
        for (std::size_t i = 0; i < x.dim(); ++i) u(i, k) = x(k, i);
    try {
        return MembershipMatrix(std::move(u));
    } catch (const InvalidArgument& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace gfcsd
