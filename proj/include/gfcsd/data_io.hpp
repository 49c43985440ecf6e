#pragma once

// Dataset ingestion (CSV), per-row variance normalization and seeded
// isotropic Gaussian mixtures.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gfcsd/error.hpp"
#include "gfcsd/linalg.hpp"

namespace gfcsd {

struct LabeledDataset {
    DataMatrix data;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;  ///< label code -> original text
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// True when some non-label cell of the first line does not parse as a number.
inline bool csv_has_header(const std::string& path, std::optional<std::size_t> label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) return false;
    const auto cells = detail::split_commas(line);
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (label_column && *label_column == j) continue;
        if (!detail::parse_double(cells[j])) return true;
    }
    return false;
}

/// Reads a comma-separated numeric table. The optional label column may hold
/// any text; labels are coded 0, 1, ... in order of first appearance.
inline LabeledDataset load_csv(const std::string& path, bool has_header,
                               std::optional<std::size_t> label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::vector<std::string> header;
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    std::unordered_map<std::string, int> codes;
    std::size_t width = 0, rows = 0, line_no = 0;
    std::string line;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_commas(line);
        if (width == 0) {
            width = cells.size();
            if (label_column && *label_column >= width)
                throw IoError(path + ": label column " + std::to_string(*label_column) +
                              " out of range for " + std::to_string(width) + " columns");
        } else if (cells.size() != width) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(width) + " fields, found " +
                          std::to_string(cells.size()));
        }
        if (has_header && header.empty()) {
            for (std::size_t j = 0; j < cells.size(); ++j)
                if (!label_column || *label_column != j) header.emplace_back(cells[j]);
            if (header.empty()) header.emplace_back();
            continue;
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (label_column && *label_column == j) {
                const std::string key(cells[j]);
                auto [it, inserted] = codes.emplace(key, static_cast<int>(label_names.size()));
                if (inserted) label_names.push_back(key);
                labels.push_back(it->second);
                continue;
            }
            const auto v = detail::parse_double(cells[j]);
            if (!v)
                throw IoError(path + ": cannot parse '" + std::string(cells[j]) + "' at row " +
                              std::to_string(line_no) + ", column " + std::to_string(j + 1));
            values.push_back(*v);
        }
        ++rows;
    }
    if (rows == 0) throw IoError(path + ": no data rows");
    const std::size_t dim = width - (label_column ? 1 : 0);
    if (dim == 0) throw IoError(path + ": no feature columns");

    LabeledDataset ds{DataMatrix(Matrix(rows, dim, std::move(values))), std::nullopt, {}, {}};
    if (label_column) {
        ds.labels = std::move(labels);
        ds.label_names = std::move(label_names);
    }
    if (has_header) ds.feature_names = std::move(header);
    return ds;
}

/// Writes features (17 significant digits) and, when present, a trailing
/// "label" column holding the label codes.
inline void write_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const auto& x = ds.data;
    for (std::size_t d = 0; d < x.dim(); ++d) {
        if (d) out << ',';
        out << (d < ds.feature_names.size() ? ds.feature_names[d] : "x" + std::to_string(d));
    }
    if (ds.labels) out << ",label";
    out << '\n';
    out.precision(17);
    for (std::size_t k = 0; k < x.points(); ++k) {
        for (std::size_t d = 0; d < x.dim(); ++d) {
            if (d) out << ',';
            out << x(k, d);
        }
        if (ds.labels) out << ',' << (*ds.labels)[k];
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Per row: subtract the row mean and divide by the population (1/n)
/// standard deviation. Constant rows become all zeros.
inline DataMatrix variance_normalize(const DataMatrix& data) {
    const std::size_t n = data.dim();
    if (n < 2) throw InvalidArgument("variance_normalize: need at least two columns");
    Matrix out(data.points(), n);
    for (std::size_t k = 0; k < data.points(); ++k) {
        const auto row = data.point(k);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (std::size_t j = 0; j < n; ++j) out(k, j) = sd > 0.0 ? (row[j] - mean) / sd : 0.0;
    }
    return DataMatrix(std::move(out));
}

struct MixtureGroup {
    std::vector<double> center;
    double sigma = 0.1;
    std::size_t count = 1;
};

struct MixtureSpec {
    std::vector<MixtureGroup> groups;
    std::uint64_t seed = 0;

    void validate() const {
        if (groups.empty()) throw InvalidArgument("mixture spec has no groups");
        const std::size_t n = groups.front().center.size();
        if (n == 0) throw InvalidArgument("mixture centers must be non-empty");
        for (const auto& g : groups) {
            if (g.center.size() != n) throw DimensionError("mixture centers differ in dimension");
            if (g.count < 1) throw InvalidArgument("mixture group count must be >= 1");
            if (!(g.sigma > 0.0)) throw InvalidArgument("mixture sigma must be > 0");
        }
    }
};

/// Four uneven groups in the plane: 300, 30, 30 and 50 points.
inline MixtureSpec artificial_spec(double sigma = 0.1, std::uint64_t seed = 0) {
    return {{{{-0.5, -0.4}, sigma, 300},
             {{0.1, 0.2}, sigma, 30},
             {{0.5, 0.7}, sigma, 30},
             {{0.6, -0.3}, sigma, 50}},
            seed};
}

/// Samples each group in order; labels are group indices.
inline LabeledDataset gen_gaussian_mixture(const MixtureSpec& spec) {
    spec.validate();
    const std::size_t n = spec.groups.front().center.size();
    std::size_t total = 0;
    for (const auto& g : spec.groups) total += g.count;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(total, n);
    std::vector<int> labels;
    labels.reserve(total);
    std::size_t row = 0;
    for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
        const auto& g = spec.groups[gi];
        for (std::size_t s = 0; s < g.count; ++s, ++row) {
            for (std::size_t d = 0; d < n; ++d) x(row, d) = g.center[d] + g.sigma * normal(rng);
            labels.push_back(static_cast<int>(gi));
        }
    }
    return {DataMatrix(std::move(x)), std::move(labels), {}, {}};
}

}  // namespace gfcsd
