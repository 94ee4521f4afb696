#pragma once

// Readers and writers for every file the pipeline produces. Feature indices
// are written 1-based and read back 0-based. Numbers use the shortest
// representation that round-trips, so rereading a file gives the exact values.

#include "safs/dataset.hpp"
#include "safs/error.hpp"
#include "safs/experiment.hpp"
#include "safs/fnn.hpp"
#include "safs/saliency.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace safs::io {

using nlohmann::json;

inline constexpr const char* kModelVersion = "safs-model/1";
inline constexpr const char* kReportVersion = "safs-report/1";
inline constexpr const char* kSelectionVersion = "safs-selection/1";

// Trained network plus everything needed to feed it raw encoded rows.
struct ModelCheckpoint {
    NetworkParams params;
    NormalizationStats normalization;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::vector<Range> feature_ranges;  // post-normalization training ranges
};

inline std::string format_number(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

namespace detail {

inline std::vector<std::size_t> one_based(const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out(v);
    for (auto& x : out) ++x;
    return out;
}

inline std::vector<std::size_t> zero_based(const json& j) {
    std::vector<std::size_t> out;
    for (const auto& x : j) {
        const auto v = x.get<std::size_t>();
        if (v == 0) throw ParseError("feature indices are 1-based");
        out.push_back(v - 1);
    }
    return out;
}

inline Matrix matrix_from(const json& flat, std::size_t rows, std::size_t cols, const char* name) {
    const auto values = flat.get<std::vector<double>>();
    if (values.size() != rows * cols)
        throw ParseError(std::string(name) + " has " + std::to_string(values.size()) + " values, expected " +
                         std::to_string(rows * cols));
    Matrix m(rows, cols);
    m.values() = values;
    return m;
}

inline void expect_version(const json& j, const char* version) {
    if (!j.contains("version") || j["version"] != version)
        throw ParseError(std::string("expected version '") + version + "'");
}

} // namespace detail

// ---- model checkpoint --------------------------------------------------------

inline json to_json(const ModelCheckpoint& m) {
    const auto& p = m.params;
    json ranges = json::array();
    for (const auto& r : m.feature_ranges) ranges.push_back({r.lo, r.hi});
    return {{"version", kModelVersion},
            {"input_units", p.inputs()},
            {"hidden_units", p.hidden()},
            {"output_units", p.outputs()},
            {"input_weights", p.input_weights.values()},
            {"hidden_bias", p.hidden_bias},
            {"output_weights", p.output_weights.values()},
            {"output_bias", p.output_bias},
            {"normalization", {{"means", m.normalization.means}, {"scales", m.normalization.scales}}},
            {"feature_names", m.feature_names},
            {"class_names", m.class_names},
            {"feature_ranges", ranges}};
}

inline ModelCheckpoint model_from_json(const json& j) {
    try {
        detail::expect_version(j, kModelVersion);
        const auto H = j.at("input_units").get<std::size_t>();
        const auto N = j.at("hidden_units").get<std::size_t>();
        const auto K = j.at("output_units").get<std::size_t>();
        ModelCheckpoint m;
        m.params.input_weights = detail::matrix_from(j.at("input_weights"), H, N, "input_weights");
        m.params.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
        m.params.output_weights = detail::matrix_from(j.at("output_weights"), N, K, "output_weights");
        m.params.output_bias = j.at("output_bias").get<std::vector<double>>();
        m.normalization.means = j.at("normalization").at("means").get<std::vector<double>>();
        m.normalization.scales = j.at("normalization").at("scales").get<std::vector<double>>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        for (const auto& r : j.at("feature_ranges")) m.feature_ranges.push_back({r.at(0), r.at(1)});
        if (!m.params.consistent() || m.feature_names.size() != H || m.class_names.size() != K ||
            m.feature_ranges.size() != H || m.normalization.means.size() != H || m.normalization.scales.size() != H)
            throw ParseError("model dimensions are inconsistent");
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model checkpoint: ") + e.what());
    }
}

inline void write_model(const std::filesystem::path& path, const ModelCheckpoint& m) {
    write_text(path, to_json(m).dump(2) + "\n");
}

inline ModelCheckpoint read_model(const std::filesystem::path& path) {
    return model_from_json(parse_json_file(path));
}

inline void write_history_csv(const std::filesystem::path& path, const TrainReport& report) {
    std::string out = "epoch,train_ce,validation_ce\n";
    for (std::size_t e = 0; e < report.history.size(); ++e)
        out += std::to_string(e + 1) + "," + format_number(report.history[e].train_ce) + "," +
               format_number(report.history[e].validation_ce) + "\n";
    write_text(path, out);
}

// ---- contribution report -----------------------------------------------------

inline json to_json(const ContributionReport& r) {
    json te = json::array();
    for (std::size_t h = 0; h < r.te_matrix.rows(); ++h) {
        const auto row = r.te_matrix.row(h);
        te.push_back(std::vector<double>(row.begin(), row.end()));
    }
    std::vector<double> percent(r.contributions);
    for (auto& c : percent) c *= 100.0;
    return {{"version", kReportVersion},
            {"feature_names", r.feature_names},
            {"te_matrix", te},
            {"s_total", r.s_total},
            {"contributions", r.contributions},
            {"contribution_percent", percent},
            {"ranking", detail::one_based(r.ranking)},
            {"uniform_fallback", r.uniform_fallback}};
}

inline ContributionReport report_from_json(const json& j) {
    try {
        detail::expect_version(j, kReportVersion);
        ContributionReport r;
        r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& te = j.at("te_matrix");
        const std::size_t H = r.feature_names.size();
        const std::size_t K = H ? te.at(0).size() : 0;
        if (te.size() != H) throw ParseError("te_matrix row count differs from feature count");
        r.te_matrix = Matrix(H, K);
        for (std::size_t h = 0; h < H; ++h) {
            if (te[h].size() != K) throw ParseError("te_matrix is ragged");
            for (std::size_t k = 0; k < K; ++k) r.te_matrix(h, k) = te[h][k].get<double>();
        }
        r.s_total = j.at("s_total").get<std::vector<double>>();
        r.contributions = j.at("contributions").get<std::vector<double>>();
        r.ranking = detail::zero_based(j.at("ranking"));
        r.uniform_fallback = j.value("uniform_fallback", false);
        if (r.s_total.size() != H || r.contributions.size() != H) throw ParseError("report vectors differ in length");
        check_permutation(r.ranking, H);
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("contribution report: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("contribution report: ") + e.what());
    }
}

inline void write_report(const std::filesystem::path& path, const ContributionReport& r) {
    write_text(path, to_json(r).dump(2) + "\n");
}

inline ContributionReport read_report(const std::filesystem::path& path) {
    return report_from_json(parse_json_file(path));
}

// Two columns, one row per feature in index order: the bar-chart data.
inline void write_contributions_csv(const std::filesystem::path& path, const ContributionReport& r) {
    std::string out = "feature,contribution_percent\n";
    for (std::size_t h = 0; h < r.contributions.size(); ++h)
        out += r.feature_names[h] + "," + format_number(100.0 * r.contributions[h]) + "\n";
    write_text(path, out);
}

struct ContributionRow {
    std::string feature;
    double percent = 0.0;
};

inline std::vector<ContributionRow> read_contributions_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    const auto table = parse_csv(in, "feature");
    std::vector<ContributionRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        ContributionRow row{table.rows[i][0], 0.0};
        if (!safs::detail::parse_double(table.rows[i][1], row.percent))
            throw ParseError("bad contribution value", i + 2);
        rows.push_back(row);
    }
    return rows;
}

// ---- selection ---------------------------------------------------------------

inline json to_json(const SelectionResult& s, const std::vector<std::string>& feature_names) {
    std::vector<std::string> kept_names;
    for (auto h : s.kept) kept_names.push_back(feature_names.at(h));
    return {{"version", kSelectionVersion},
            {"threshold", s.threshold},
            {"kept", detail::one_based(s.kept)},
            {"dropped", detail::one_based(s.dropped)},
            {"kept_names", kept_names}};
}

inline SelectionResult selection_from_json(const json& j) {
    try {
        detail::expect_version(j, kSelectionVersion);
        SelectionResult s;
        s.threshold = j.at("threshold").get<double>();
        s.kept = detail::zero_based(j.at("kept"));
        s.dropped = detail::zero_based(j.at("dropped"));
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("selection: ") + e.what());
    }
}

inline void write_selection(const std::filesystem::path& path, const SelectionResult& s,
                            const std::vector<std::string>& feature_names) {
    write_text(path, to_json(s, feature_names).dump(2) + "\n");
}

inline SelectionResult read_selection(const std::filesystem::path& path) {
    return selection_from_json(parse_json_file(path));
}

// ---- stepwise curves ---------------------------------------------------------

inline void write_curve_csv(const std::filesystem::path& path, const StepwiseCurve& c) {
    std::string out = "step,n_features,feature_added,val_accuracy,test_accuracy\n";
    for (std::size_t t = 0; t < c.steps.size(); ++t) {
        const auto& s = c.steps[t];
        out += std::to_string(t + 1) + "," + std::to_string(s.subset.size()) + "," +
               std::to_string(s.feature_added() + 1) + "," + format_number(s.validation_accuracy) + "," +
               format_number(s.test_accuracy) + "\n";
    }
    write_text(path, out);
}

inline StepwiseCurve read_curve_csv(const std::filesystem::path& path, Order order) {
    std::istringstream in(read_text(path));
    const auto table = parse_csv(in, "step");
    StepwiseCurve c{order, {}};
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        double step, n, added;
        CurveStep s;
        if (row.size() != 5 || !safs::detail::parse_double(row[0], step) || !safs::detail::parse_double(row[1], n) ||
            !safs::detail::parse_double(row[2], added) ||
            !safs::detail::parse_double(row[3], s.validation_accuracy) ||
            !safs::detail::parse_double(row[4], s.test_accuracy) || added < 1)
            throw ParseError("malformed curve row", i + 2);
        subset.push_back(static_cast<std::size_t>(added) - 1);
        if (static_cast<std::size_t>(n) != subset.size()) throw ParseError("n_features breaks the prefix property", i + 2);
        s.subset = subset;
        c.steps.push_back(std::move(s));
    }
    return c;
}

// ---- comparison rows ---------------------------------------------------------

inline json to_json(const ComparisonRow& r) {
    return {{"dataset", r.dataset_name},
            {"full_feature_count", r.full_feature_count},
            {"full_accuracy", r.full_accuracy},
            {"selected_feature_count", r.selected_feature_count},
            {"selected_accuracy", r.selected_accuracy}};
}

inline void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    write_text(path, arr.dump(2) + "\n");
}

inline std::vector<ComparisonRow> read_comparison(const std::filesystem::path& path) {
    const auto j = parse_json_file(path);
    try {
        std::vector<ComparisonRow> rows;
        for (const auto& r : j) {
            rows.push_back({r.at("dataset").get<std::string>(), r.at("full_feature_count").get<std::size_t>(),
                            r.at("full_accuracy").get<double>(), r.at("selected_feature_count").get<std::size_t>(),
                            r.at("selected_accuracy").get<double>()});
        }
        return rows;
    } catch (const json::exception& e) {
        throw ParseError(std::string("comparison: ") + e.what());
    }
}

} // namespace safs::io
