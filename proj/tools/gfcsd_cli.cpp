// gfcsd: command-line front end.
//
//   gfcsd fit      --input data.csv --output report.json [options]
//   gfcsd sweep    --input data.csv --output sweep.json --cmin 2 --cmax 20
//   gfcsd generate --preset artificial --output data.csv
//   gfcsd eval     --report report.json --labels truth.csv
//
// Exit status: 0 success, 2 usage or validation error, 1 runtime failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "gfcsd/data_io.hpp"
#include "gfcsd/pipeline.hpp"
#include "gfcsd/report.hpp"

namespace fs = std::filesystem;
using namespace gfcsd;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Raised for bad flag combinations and invalid parameter values.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SharedOptions {
    std::string input;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::string config;
};

struct DataOptions {
    std::string header = "auto";
    std::optional<std::size_t> label_column;
    bool normalize = false;
};

struct FitOptions {
    SharedOptions shared;
    DataOptions data;
    std::string memberships;
    GfcSdConfig cfg;
    CLI::Option* cmax = nullptr;
    CLI::Option* m = nullptr;
    CLI::Option* g = nullptr;
    CLI::Option* p = nullptr;
    CLI::Option* epsilon = nullptr;
    CLI::Option* tau1 = nullptr;
    CLI::Option* tau2 = nullptr;
    CLI::Option* r1 = nullptr;
    CLI::Option* max_iters = nullptr;
    CLI::Option* max_outer = nullptr;
};

struct SweepOptions {
    SharedOptions shared;
    DataOptions data;
    std::size_t cmin = 2;
    std::size_t cmax = 20;
    std::size_t restarts = 1;
    GfcSdConfig cfg;
    CLI::Option* m = nullptr;
    CLI::Option* epsilon = nullptr;
    CLI::Option* max_iters = nullptr;
};

struct GenerateOptions {
    std::string output;
    std::optional<std::uint64_t> seed;
    std::string preset;
    std::string spec;
    double sigma = 0.1;
    CLI::Option* sigma_opt = nullptr;
};

struct EvalOptions {
    std::string report;
    std::string labels;
    std::string header = "auto";
    std::optional<std::size_t> label_column;
    std::string output;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cout << "no --seed given; using seed " << drawn << '\n';
    return drawn;
}

void add_shared(CLI::App* cmd, SharedOptions& o) {
    cmd->add_option("--input", o.input, "Input CSV (comma-separated, '.' decimals)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--output", o.output, "Report path (JSON)")->required();
    cmd->add_option("--seed", o.seed,
                    "Random seed (unsigned 64-bit); drawn at random and echoed when omitted");
    cmd->add_option("--config", o.config,
                    "JSON config file; flags override its keys, which override defaults")
        ->check(CLI::ExistingFile);
}

void add_data(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--header", o.header, "Whether the first CSV line is a header")
        ->check(CLI::IsMember({"auto", "yes", "no"}))
        ->capture_default_str();
    cmd->add_option("--label-column", o.label_column,
                    "Zero-based column holding class labels; excluded from the features and "
                    "used to score accuracy (default: none)");
    cmd->add_flag("--normalize", o.normalize,
                  "Variance-normalize every row (mean 0, population std 1) before clustering");
}

LabeledDataset load_input(const std::string& path, const DataOptions& o) {
    const bool header = o.header == "yes" || (o.header == "auto" && csv_has_header(path, o.label_column));
    auto ds = load_csv(path, header, o.label_column);
    if (o.normalize) ds.data = variance_normalize(ds.data);
    return ds;
}

GfcSdConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return config_from_json(read_report(path));
}

std::string default_memberships_path(const std::string& report) {
    fs::path p(report);
    p.replace_extension(".memberships.csv");
    return p.string();
}

int run_fit(FitOptions& o) {
    GfcSdConfig cfg = load_config(o.shared.config);
    auto set = [](CLI::Option* opt, auto& dst, const auto& src) {
        if (opt->count() > 0) dst = src;
    };
    set(o.cmax, cfg.c_max, o.cfg.c_max);
    set(o.m, cfg.engine.m, o.cfg.engine.m);
    set(o.g, cfg.engine.g, o.cfg.engine.g);
    set(o.p, cfg.engine.p, o.cfg.engine.p);
    set(o.epsilon, cfg.engine.epsilon, o.cfg.engine.epsilon);
    set(o.r1, cfg.engine.r1, o.cfg.engine.r1);
    set(o.max_iters, cfg.engine.max_iters, o.cfg.engine.max_iters);
    set(o.tau1, cfg.policy.tau1, o.cfg.policy.tau1);
    set(o.tau2, cfg.policy.tau2, o.cfg.policy.tau2);
    set(o.max_outer, cfg.policy.max_outer_iters, o.cfg.policy.max_outer_iters);

    try {
        cfg.engine.validate();
        cfg.policy.validate();
        if (cfg.c_max < 2) throw InvalidArgument("--cmax must be >= 2");
        if (cfg.engine.p != 2.0) throw InvalidArgument("fitting supports --p 2 only");
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }

    const auto ds = load_input(o.shared.input, o.data);
    try {
        cfg.validate(ds.data.points());
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const std::uint64_t seed = resolve_seed(o.shared.seed);

    const auto result = gfc_sd(ds.data, cfg, seed);

    std::optional<AlignmentScore> score;
    if (ds.labels) score = align_and_score(result.memberships.argmax_labels(), *ds.labels);

    const std::string mem_path =
        o.memberships.empty() ? default_memberships_path(o.shared.output) : o.memberships;
    write_memberships_csv(result.memberships, mem_path);
    const fs::path report_dir = fs::absolute(o.shared.output).parent_path();
    const std::string mem_ref = fs::relative(fs::absolute(mem_path), report_dir).string();
    write_report(fit_report(result, ds.data, cfg, seed, mem_ref, score), o.shared.output);

    std::cout << "seed " << seed << '\n'
              << "final c " << result.final_clusters() << " after " << result.trace.size()
              << " outer iterations (DB_FR-optimal c " << result.db_optimal_clusters() << ")\n";
    if (score) std::cout << "accuracy " << std::setprecision(4) << score->accuracy << '\n';
    std::cout << "report " << o.shared.output << "\nmemberships " << mem_path << '\n';
    return 0;
}

int run_sweep(SweepOptions& o) {
    GfcSdConfig cfg = load_config(o.shared.config);
    if (o.m->count() > 0) cfg.engine.m = o.cfg.engine.m;
    if (o.epsilon->count() > 0) cfg.engine.epsilon = o.cfg.engine.epsilon;
    if (o.max_iters->count() > 0) cfg.engine.max_iters = o.cfg.engine.max_iters;
    cfg.engine.g = 0.0;
    try {
        cfg.engine.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (o.cmin < 2 || o.cmin > o.cmax) throw UsageError("need 2 <= --cmin <= --cmax");
    if (o.restarts == 0) throw UsageError("--restarts must be >= 1");

    const auto ds = load_input(o.shared.input, o.data);
    if (o.cmax >= ds.data.points())
        throw UsageError("--cmax " + std::to_string(o.cmax) + " must be smaller than the " +
                         std::to_string(ds.data.points()) + " input points");
    const std::uint64_t seed = resolve_seed(o.shared.seed);

    const auto t0 = std::chrono::steady_clock::now();
    const auto sweep = fcm_xie_sweep(ds.data, o.cmin, o.cmax, cfg.engine, seed, o.restarts);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(sweep_report(sweep, cfg.engine, o.cmin, o.cmax, seed, wall), o.shared.output);

    std::cout << "seed " << seed << '\n';
    for (const auto& [c, xb] : sweep.curve)
        std::cout << "c " << std::setw(3) << c << "  xie_beni " << std::setprecision(6) << xb
                  << (c == sweep.best_clusters ? "  <- best" : "") << '\n';
    std::cout << "best c " << sweep.best_clusters << "\nreport " << o.shared.output << '\n';
    return 0;
}

/// Mixture groups from a JSON file, plus its seed when the file has one.
std::pair<MixtureSpec, std::optional<std::uint64_t>> read_mixture_spec(const std::string& path) {
    const json j = read_report(path);
    MixtureSpec spec;
    std::optional<std::uint64_t> seed;
    try {
        for (const auto& [key, _] : j.items())
            if (key != "groups" && key != "seed")
                throw UsageError(path + ": unknown mixture key '" + key + "'");
        for (const auto& g : j.at("groups")) {
            for (const auto& [key, _] : g.items())
                if (key != "center" && key != "sigma" && key != "count")
                    throw UsageError(path + ": unknown group key '" + key + "'");
            MixtureGroup group;
            group.center = g.at("center").get<std::vector<double>>();
            group.sigma = g.value("sigma", 0.1);
            group.count = g.at("count").get<std::size_t>();
            spec.groups.push_back(std::move(group));
        }
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
    return {std::move(spec), seed};
}

int run_generate(GenerateOptions& o) {
    if (o.preset.empty() == o.spec.empty()) throw UsageError("give exactly one of --preset or --spec");
    MixtureSpec spec;
    std::optional<std::uint64_t> seed = o.seed;
    if (!o.preset.empty()) {
        if (!(o.sigma > 0.0)) throw UsageError("--sigma must be > 0");
        spec = artificial_spec(o.sigma);
    } else {
        auto [from_file, file_seed] = read_mixture_spec(o.spec);
        spec = std::move(from_file);
        if (!seed) seed = file_seed;
        if (o.sigma_opt->count() > 0) {
            if (!(o.sigma > 0.0)) throw UsageError("--sigma must be > 0");
            for (auto& g : spec.groups) g.sigma = o.sigma;
        }
    }
    spec.seed = resolve_seed(seed);
    try {
        spec.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const auto ds = gen_gaussian_mixture(spec);
    write_csv(ds, o.output);
    std::cout << "seed " << spec.seed << '\n'
              << "wrote " << ds.data.points() << " rows x " << ds.data.dim()
              << " features + label to " << o.output << '\n';
    return 0;
}

int run_eval(EvalOptions& o) {
    const json report = read_report(o.report);
    if (!report.contains("memberships_path") || report.value("command", "") != "fit")
        throw UsageError(o.report + " is not a fit report");
    fs::path mem = report["memberships_path"].get<std::string>();
    if (mem.is_relative()) mem = fs::absolute(o.report).parent_path() / mem;
    const auto u = read_memberships_csv(mem.string());

    std::size_t label_col = 0;
    if (o.label_column) {
        label_col = *o.label_column;
    } else {
        std::ifstream in(o.labels);
        std::string line;
        std::getline(in, line);
        label_col = detail::split_commas(line).size() - 1;
    }
    const bool header =
        o.header == "yes" || (o.header == "auto" && csv_has_header(o.labels, label_col));
    const auto truth = load_csv(o.labels, header, label_col);
    if (truth.labels->size() != u.points())
        throw UsageError("label count mismatch: " + o.labels + " has " +
                         std::to_string(truth.labels->size()) + " labels but the report has " +
                         std::to_string(u.points()) + " points");

    const auto score = align_and_score(u.argmax_labels(), *truth.labels);
    std::cout << "confusion (rows: true classes, columns: aligned clusters)\n";
    for (std::size_t i = 0; i < score.confusion.size(); ++i) {
        std::cout << "  " << (i < truth.label_names.size() ? truth.label_names[i] : "-");
        for (long v : score.confusion.counts[i]) std::cout << ' ' << std::setw(6) << v;
        std::cout << '\n';
    }
    std::cout << "accuracy " << std::setprecision(6) << score.accuracy << " ("
              << score.confusion.trace() << "/" << truth.labels->size() << ")\n";
    if (!o.output.empty()) {
        json out = confusion_to_json(score);
        out["report"] = o.report;
        out["labels"] = o.labels;
        write_report(out, o.output);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy clustering with automatic selection of the number of clusters"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    const GfcSdConfig defaults;

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Run GFC-SD and write a JSON report plus a memberships CSV");
    add_shared(fit_cmd, fit.shared);
    add_data(fit_cmd, fit.data);
    fit_cmd->add_option("--memberships", fit.memberships,
                        "Memberships CSV path (default: <output stem>.memberships.csv)");
    fit.cfg = defaults;
    fit.cmax = fit_cmd->add_option("--cmax", fit.cfg.c_max, "Initial (maximum) number of clusters, >= 2");
    fit.m = fit_cmd->add_option("--m", fit.cfg.engine.m, "Fuzziness exponent, > 1");
    fit.g = fit_cmd->add_option("--g", fit.cfg.engine.g, "Principal-axis weight in [0, 1]");
    fit.p = fit_cmd->add_option("--p", fit.cfg.engine.p, "Norm order; fitting supports 2 only");
    fit.epsilon = fit_cmd->add_option("--epsilon", fit.cfg.engine.epsilon,
                                      "Stop a fit when max |U_new - U| < epsilon");
    fit.tau1 = fit_cmd->add_option("--tau1", fit.cfg.policy.tau1, "Lower merge threshold");
    fit.tau2 = fit_cmd->add_option("--tau2", fit.cfg.policy.tau2, "Upper merge threshold");
    fit.r1 = fit_cmd->add_option("--r1", fit.cfg.engine.r1, "Minimum number of principal axes");
    fit.max_iters = fit_cmd->add_option("--max-iters", fit.cfg.engine.max_iters,
                                        "Iteration cap for each fit");
    fit.max_outer = fit_cmd->add_option("--max-outer-iters", fit.cfg.policy.max_outer_iters,
                                        "Cap on fit/merge rounds");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Run plain FCM for every c in [cmin, cmax] and pick c by the Xie-Beni index");
    add_shared(sweep_cmd, sweep.shared);
    add_data(sweep_cmd, sweep.data);
    sweep.cfg = defaults;
    sweep_cmd->add_option("--cmin", sweep.cmin, "Smallest cluster count, >= 2");
    sweep_cmd->add_option("--cmax", sweep.cmax, "Largest cluster count, < number of points");
    sweep_cmd->add_option("--restarts", sweep.restarts,
                          "Random starts per c; the lowest-objective fit is scored");
    sweep.m = sweep_cmd->add_option("--m", sweep.cfg.engine.m, "Fuzziness exponent, > 1");
    sweep.epsilon = sweep_cmd->add_option("--epsilon", sweep.cfg.engine.epsilon,
                                          "Stop a fit when max |U_new - U| < epsilon");
    sweep.max_iters = sweep_cmd->add_option("--max-iters", sweep.cfg.engine.max_iters,
                                            "Iteration cap for each fit");

    GenerateOptions gen;
    auto* gen_cmd = app.add_subcommand("generate", "Write a seeded Gaussian mixture as CSV with a label column");
    gen_cmd->add_option("--output", gen.output, "Output CSV path")->required();
    gen_cmd->add_option("--seed", gen.seed,
                        "Random seed; taken from the spec file or drawn at random (and echoed) when omitted");
    auto* preset = gen_cmd->add_option("--preset", gen.preset,
                                       "Built-in mixture: four uneven groups in the plane (410 points)")
                       ->check(CLI::IsMember({"artificial"}));
    auto* spec = gen_cmd->add_option(
        "--spec", gen.spec,
        R"(JSON mixture file: {"groups": [{"center": [..], "sigma": s, "count": n}], "seed": k})")
                     ->check(CLI::ExistingFile);
    preset->excludes(spec);
    gen.sigma_opt = gen_cmd->add_option("--sigma", gen.sigma,
                                        "Standard deviation of every group (overrides the spec file)");

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a fit report against known labels");
    eval_cmd->add_option("--report", ev.report, "Fit report JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--labels", ev.labels,
                         "CSV with feature columns and a label column (e.g. the fit input)")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--header", ev.header, "Whether the first CSV line is a header")
        ->check(CLI::IsMember({"auto", "yes", "no"}));
    eval_cmd->add_option("--label-column", ev.label_column,
                         "Zero-based label column in the labels CSV (default: last column)");
    eval_cmd->add_option("--output", ev.output, "Optional JSON file for accuracy and confusion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*sweep_cmd) return run_sweep(sweep);
        if (*gen_cmd) return run_generate(gen);
        if (*eval_cmd) return run_eval(ev);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
