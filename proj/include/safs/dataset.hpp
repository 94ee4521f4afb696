#pragma once

#include "safs/error.hpp"
#include "safs/matrix.hpp"
#include "safs/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace safs {

using ClassIndex = std::size_t;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double width() const noexcept { return hi - lo; }
    friend bool operator==(const Range&, const Range&) = default;
};

// Untyped table straight out of a delimited text file.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> rows;
    std::size_t label_column = 0;
};

// Encoded classification data: L samples by H features, labels in [0, K).
struct Dataset {
    Matrix features;
    std::vector<ClassIndex> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::vector<Range> feature_ranges;

    std::size_t samples() const noexcept { return features.rows(); }
    std::size_t num_features() const noexcept { return feature_names.size(); }
    std::size_t num_classes() const noexcept { return class_names.size(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Validation and test parts carry the training part's feature ranges.
struct SplitDataset {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::uint64_t seed = 0;
};

struct NormalizationStats {
    std::vector<double> means;
    std::vector<double> scales;
};

struct SplitFractions {
    double train = 0.5;
    double validation = 0.25;
    double test = 0.25;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Splits one record. Double quotes group a cell; "" inside quotes is a literal quote.
inline std::vector<std::string> split_record(std::string_view line, char delimiter, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"' && trim(cell).empty()) {
            cell.clear();
            quoted = true;
            was_quoted = true;
        } else if (ch == delimiter) {
            cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
            cell.clear();
            was_quoted = false;
        } else {
            cell.push_back(ch);
        }
    }
    if (quoted) throw ParseError("unterminated quoted cell", line_no);
    cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
    return cells;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool is_missing(std::string_view cell) { return cell.empty() || cell == "?"; }

inline std::size_t resolve_column(const std::vector<std::string>& names, const std::string& id) {
    if (auto it = std::find(names.begin(), names.end(), id); it != names.end())
        return static_cast<std::size_t>(it - names.begin());
    long long index = 0;
    const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
    if (ec == std::errc() && ptr == id.data() + id.size()) {
        const auto n = static_cast<long long>(names.size());
        if (index < 0) index += n;
        if (index >= 0 && index < n) return static_cast<std::size_t>(index);
    }
    throw ConfigError("unknown label column '" + id + "'");
}

} // namespace detail

// Reads delimited text. `label_column` is a header name or a 0-based column
// index (negative counts from the end). Blank lines are skipped.
inline RawTable parse_csv(std::istream& in, const std::string& label_column, bool has_header = true,
                          char delimiter = ',') {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    std::size_t arity = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_record(line, delimiter, line_no);
        if (header_pending) {
            table.column_names = std::move(cells);
            arity = table.column_names.size();
            header_pending = false;
            continue;
        }
        if (arity == 0) {
            arity = cells.size();
            for (std::size_t c = 0; c < arity; ++c) table.column_names.push_back("f" + std::to_string(c + 1));
        }
        if (cells.size() != arity)
            throw ParseError("expected " + std::to_string(arity) + " cells, found " + std::to_string(cells.size()),
                             line_no);
        table.rows.push_back(std::move(cells));
    }
    if (table.column_names.empty()) throw ParseError("no header or data rows");
    table.label_column = detail::resolve_column(table.column_names, label_column);
    return table;
}

inline RawTable load_csv(const std::string& path, const std::string& label_column, bool has_header = true,
                         char delimiter = ',') {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return parse_csv(in, label_column, has_header, delimiter);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline bool is_numeric_column(const RawTable& raw, std::size_t column) {
    double v;
    return std::all_of(raw.rows.begin(), raw.rows.end(),
                       [&](const auto& row) { return detail::parse_double(row[column], v); });
}

// Per-feature [min, max] over the rows of ds.
inline std::vector<Range> empirical_ranges(const Dataset& ds) {
    std::vector<Range> ranges(ds.num_features());
    for (std::size_t h = 0; h < ds.num_features(); ++h) {
        if (ds.samples() == 0) continue;
        Range r{ds.features(0, h), ds.features(0, h)};
        for (std::size_t i = 1; i < ds.samples(); ++i) {
            r.lo = std::min(r.lo, ds.features(i, h));
            r.hi = std::max(r.hi, ds.features(i, h));
        }
        ranges[h] = r;
    }
    return ranges;
}

// Numeric columns pass through; any other column is coded 0..n-1 in order of
// first appearance. Labels are coded the same way.
inline Dataset encode(const RawTable& raw) {
    const std::size_t width = raw.column_names.size();
    if (raw.label_column >= width) throw ConfigError("label column out of range");
    if (width < 2) throw ConfigError("table needs at least one feature column besides the label");

    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            if (detail::is_missing(raw.rows[r][c]))
                throw ParseError("row " + std::to_string(r + 1) + ": missing value in column '" +
                                 raw.column_names[c] + "'");
        }
    }

    Dataset ds;
    const std::size_t L = raw.rows.size();
    std::vector<std::size_t> feature_columns;
    for (std::size_t c = 0; c < width; ++c)
        if (c != raw.label_column) feature_columns.push_back(c);
    const std::size_t H = feature_columns.size();

    ds.features = Matrix(L, H);
    for (std::size_t h = 0; h < H; ++h) {
        const std::size_t c = feature_columns[h];
        ds.feature_names.push_back(raw.column_names[c]);
        if (is_numeric_column(raw, c)) {
            for (std::size_t r = 0; r < L; ++r) detail::parse_double(raw.rows[r][c], ds.features(r, h));
        } else {
            std::map<std::string, double, std::less<>> codes;
            for (std::size_t r = 0; r < L; ++r) {
                auto [it, fresh] = codes.try_emplace(raw.rows[r][c], static_cast<double>(codes.size()));
                ds.features(r, h) = it->second;
            }
        }
    }

    std::map<std::string, ClassIndex, std::less<>> classes;
    ds.labels.reserve(L);
    for (const auto& row : raw.rows) {
        const auto& name = row[raw.label_column];
        auto [it, fresh] = classes.try_emplace(name, ds.class_names.size());
        if (fresh) ds.class_names.push_back(name);
        ds.labels.push_back(it->second);
    }
    if (ds.class_names.size() < 2)
        throw ConfigError("label column '" + raw.column_names[raw.label_column] + "' has fewer than 2 classes");

    ds.feature_ranges = empirical_ranges(ds);
    return ds;
}

inline std::vector<std::size_t> constant_features(const Dataset& ds) {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < ds.num_features(); ++h) {
        bool constant = true;
        for (std::size_t i = 1; i < ds.samples() && constant; ++i)
            constant = ds.features(i, h) == ds.features(0, h);
        if (constant) out.push_back(h);
    }
    return out;
}

inline Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = Matrix(rows.size(), ds.num_features());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = ds.features.row(rows[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels.push_back(ds.labels[rows[i]]);
    }
    out.feature_names = ds.feature_names;
    out.class_names = ds.class_names;
    out.feature_ranges = ds.feature_ranges;
    return out;
}

// Keeps the listed feature columns, in the listed order.
inline Dataset select_features(const Dataset& ds, const std::vector<std::size_t>& features) {
    Dataset out;
    out.features = Matrix(ds.samples(), features.size());
    for (std::size_t i = 0; i < ds.samples(); ++i)
        for (std::size_t j = 0; j < features.size(); ++j) out.features(i, j) = ds.features(i, features[j]);
    for (auto h : features) {
        out.feature_names.push_back(ds.feature_names.at(h));
        out.feature_ranges.push_back(ds.feature_ranges.at(h));
    }
    out.labels = ds.labels;
    out.class_names = ds.class_names;
    return out;
}

inline SplitDataset select_features(const SplitDataset& data, const std::vector<std::size_t>& features) {
    return {select_features(data.train, features), select_features(data.validation, features),
            select_features(data.test, features), data.seed};
}

// Shuffles rows with a generator seeded by `seed`, then cuts at
// floor(train*L) and floor((train+validation)*L).
inline SplitDataset split(const Dataset& ds, SplitFractions fractions, std::uint64_t seed) {
    const double total = fractions.train + fractions.validation + fractions.test;
    if (fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0 || std::abs(total - 1.0) > 1e-9)
        throw ConfigError("split fractions must be positive and sum to 1");

    const std::size_t L = ds.samples();
    const auto cut = [L](double f) { return static_cast<std::size_t>(std::floor(f * static_cast<double>(L) + 1e-9)); };
    const std::size_t c1 = cut(fractions.train);
    const std::size_t c2 = cut(fractions.train + fractions.validation);
    if (c1 == 0 || c2 <= c1 || c2 >= L)
        throw ConfigError("dataset with " + std::to_string(L) + " rows is too small to split");

    std::vector<std::size_t> order(L);
    for (std::size_t i = 0; i < L; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    SplitDataset out;
    out.seed = seed;
    out.train = select_rows(ds, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c1)});
    out.validation = select_rows(ds, {order.begin() + static_cast<std::ptrdiff_t>(c1),
                                      order.begin() + static_cast<std::ptrdiff_t>(c2)});
    out.test = select_rows(ds, {order.begin() + static_cast<std::ptrdiff_t>(c2), order.end()});

    const auto ranges = empirical_ranges(out.train);
    out.train.feature_ranges = ranges;
    out.validation.feature_ranges = ranges;
    out.test.feature_ranges = ranges;
    return out;
}

// Population mean and standard deviation per feature. A constant column keeps
// its value as the mean and gets scale 1, so it centers to exactly zero.
inline NormalizationStats fit_normalizer(const Dataset& train) {
    const std::size_t L = train.samples();
    const std::size_t H = train.num_features();
    if (L == 0) throw ConfigError("cannot fit normalizer on an empty dataset");

    NormalizationStats stats{std::vector<double>(H, 0.0), std::vector<double>(H, 1.0)};
    for (std::size_t h = 0; h < H; ++h) {
        const double first = train.features(0, h);
        bool constant = true;
        double sum = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            sum += train.features(i, h);
            constant = constant && train.features(i, h) == first;
        }
        if (constant) {
            stats.means[h] = first;
            continue;
        }
        const double mean = sum / static_cast<double>(L);
        double ss = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            const double d = train.features(i, h) - mean;
            ss += d * d;
        }
        stats.means[h] = mean;
        const double sd = std::sqrt(ss / static_cast<double>(L));
        stats.scales[h] = sd > 0.0 ? sd : 1.0;
    }
    return stats;
}

// (x - mean) / scale per cell. Ranges go through the same map, so ranges fit on
// the training rows stay the exact min/max of the transformed training rows.
inline Dataset apply_normalizer(const Dataset& ds, const NormalizationStats& stats) {
    const std::size_t H = ds.num_features();
    if (stats.means.size() != H || stats.scales.size() != H)
        throw ConfigError("normalization stats have " + std::to_string(stats.means.size()) + " features, dataset has " +
                          std::to_string(H));
    Dataset out = ds;
    for (std::size_t i = 0; i < out.samples(); ++i)
        for (std::size_t h = 0; h < H; ++h)
            out.features(i, h) = (out.features(i, h) - stats.means[h]) / stats.scales[h];
    for (std::size_t h = 0; h < H; ++h) {
        auto& r = out.feature_ranges[h];
        r = {(r.lo - stats.means[h]) / stats.scales[h], (r.hi - stats.means[h]) / stats.scales[h]};
    }
    return out;
}

// Fits on the training part and applies to all three parts.
inline SplitDataset normalize(const SplitDataset& data, NormalizationStats* fitted = nullptr) {
    const auto stats = fit_normalizer(data.train);
    if (fitted) *fitted = stats;
    return {apply_normalizer(data.train, stats), apply_normalizer(data.validation, stats),
            apply_normalizer(data.test, stats), data.seed};
}

} // namespace safs
