#pragma once

#include "safs/artifacts.hpp"
#include "safs/dataset.hpp"
#include "safs/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace safs::cli {

// Everything one invocation needs. Defaults come from the module configs.
struct RunConfig {
    std::string subcommand;  // inspect, train, rank, select, stepwise, reproduce
    std::string data_path;
    std::string label = "-1";  // name or index; negative counts from the end
    char delimiter = ',';
    bool has_header = true;
    std::string dataset_name;  // defaults to the data file's stem
    std::uint64_t seed = 0;
    TrainConfig train;
    efast::EfastConfig efast;
    SelectionRule selection;
    std::size_t workers = 1;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::filesystem::path> report_path;  // reuse a saved ranking
};

// A RunConfig, or the exit code to return without running (help or usage error).
struct ParseResult {
    std::optional<RunConfig> config;
    int exit_code = 0;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"inspect", "train", "rank", "select", "stepwise", "reproduce"};
    return names;
}

namespace detail {

inline void add_common(CLI::App& sub, RunConfig& c) {
    sub.add_option("data", c.data_path, "Delimited text file with one row per sample")->required();
    sub.add_option("--label", c.label, "Label column, by name or index (negative counts from the end)")
        ->capture_default_str();
    sub.add_option("--delimiter", c.delimiter, "Field delimiter")->capture_default_str();
    sub.add_flag("!--no-header", c.has_header, "The first row is data, not column names");
    sub.add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
}

inline void add_training(CLI::App& sub, RunConfig& c) {
    sub.add_option("--hidden-units", c.train.hidden_units, "Hidden units (0 picks max(8, 2 x features))")
        ->capture_default_str();
    sub.add_option("--learning-rate", c.train.learning_rate, "SGD learning rate")->capture_default_str();
    sub.add_option("--patience", c.train.patience_epochs, "Epochs without validation improvement before stopping")
        ->capture_default_str();
    sub.add_option("--max-epochs", c.train.max_epochs, "Upper bound on training epochs")->capture_default_str();
    sub.add_option("--workers", c.workers, "Concurrent EFAST sweeps and stepwise trainings")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub.add_option("--out", c.out_dir, "Directory for artifact files");
}

inline void add_efast(CLI::App& sub, RunConfig& c) {
    sub.add_option("--efast-samples", c.efast.samples_per_curve, "Samples per search curve (odd)")
        ->capture_default_str();
    sub.add_option("--efast-harmonics", c.efast.max_harmonic, "Interference harmonic order")
        ->capture_default_str();
    sub.add_option("--efast-resamples", c.efast.resamples, "Independent curve phasings averaged per feature")
        ->capture_default_str();
}

inline void add_selection(CLI::App& sub, RunConfig& c, std::optional<double>& threshold,
                          std::optional<std::size_t>& top_k) {
    auto* t = sub.add_option("--threshold", threshold, "Keep features whose contribution share is at least this");
    auto* k = sub.add_option("--top-k", top_k, "Keep the k most salient features");
    t->excludes(k);
    (void)c;
}

inline void add_report(CLI::App& sub, RunConfig& c) {
    sub.add_option("--report", c.report_path, "Reuse the ranking in a saved report.json instead of training");
}

} // namespace detail

// Parses argv (without the program name). Help text goes to `out`, usage
// errors to `err`.
inline ParseResult parse_args(const std::vector<std::string>& args, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
    RunConfig c;
    std::optional<double> threshold;
    std::optional<std::size_t> top_k;

    CLI::App app{"Feature saliency ranking and selection with a neural network and EFAST", "safs"};
    app.require_subcommand(1);
    app.fallthrough(false);

    auto* inspect = app.add_subcommand("inspect", "Summarize a dataset as JSON");
    detail::add_common(*inspect, c);

    auto* train = app.add_subcommand("train", "Train a network on the training split");
    detail::add_common(*train, c);
    detail::add_training(*train, c);

    auto* rank = app.add_subcommand("rank", "Train, then rank features by total-effect contribution");
    detail::add_common(*rank, c);
    detail::add_training(*rank, c);
    detail::add_efast(*rank, c);

    auto* select = app.add_subcommand("select", "Rank, then keep a subset by threshold or top-k");
    detail::add_common(*select, c);
    detail::add_training(*select, c);
    detail::add_efast(*select, c);
    detail::add_selection(*select, c, threshold, top_k);
    detail::add_report(*select, c);

    auto* stepwise = app.add_subcommand("stepwise", "Rank, then add features one by one in both orders");
    detail::add_common(*stepwise, c);
    detail::add_training(*stepwise, c);
    detail::add_efast(*stepwise, c);
    detail::add_report(*stepwise, c);

    auto* reproduce = app.add_subcommand("reproduce", "Run every stage and compare full and selected accuracy");
    detail::add_common(*reproduce, c);
    detail::add_training(*reproduce, c);
    detail::add_efast(*reproduce, c);
    detail::add_selection(*reproduce, c, threshold, top_k);
    detail::add_report(*reproduce, c);

    // CLI11 parses argv in reverse order from a vector
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        for (auto* sub : app.get_subcommands()) c.subcommand = sub->get_name();
        c.selection = {threshold, top_k};
        c.train.validate();
        c.efast.validate();
        if (c.selection.threshold && !(*c.selection.threshold >= 0.0))
            throw CLI::ValidationError("--threshold", "must be nonnegative");
        if (c.selection.top_k && *c.selection.top_k == 0)
            throw CLI::ValidationError("--top-k", "must be at least 1");
    } catch (const CLI::ParseError& e) {
        return {std::nullopt, app.exit(e, out, err)};
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return {std::nullopt, 2};
    }
    if (c.dataset_name.empty()) c.dataset_name = std::filesystem::path(c.data_path).stem().string();
    return {c, 0};
}

namespace detail {

inline std::string percent(double fraction) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << 100.0 * fraction;
    return ss.str();
}

inline nlohmann::json inspect_summary(const RunConfig& c, const RawTable& raw) {
    const Dataset ds = encode(raw);
    const auto parts = split(ds, {}, derive_stage_seeds(c.seed).split);

    std::vector<std::string> categorical;
    std::size_t column = 0;
    for (std::size_t i = 0; i < raw.column_names.size(); ++i) {
        if (i == raw.label_column) continue;
        if (!is_numeric_column(raw, i)) categorical.push_back(ds.feature_names[column]);
        ++column;
    }
    std::vector<std::string> constant;
    for (auto h : constant_features(ds)) constant.push_back(ds.feature_names[h]);

    return {{"dataset", c.dataset_name},
            {"features", ds.num_features()},
            {"classes", ds.num_classes()},
            {"class_names", ds.class_names},
            {"train", parts.train.samples()},
            {"validation", parts.validation.samples()},
            {"test", parts.test.samples()},
            {"total", ds.samples()},
            {"categorical_features", categorical},
            {"constant_features", constant}};
}

inline void print_training(std::ostream& out, const TrainReport& t) {
    out << "training: " << t.epochs_run << " epochs, best epoch " << t.best_epoch << ", validation CE "
        << io::format_number(t.best_validation_ce) << "\n";
}

inline void print_ranking(std::ostream& out, const ContributionReport& r) {
    out << "rank  feature                 contribution %\n";
    for (std::size_t i = 0; i < r.ranking.size(); ++i) {
        const auto h = r.ranking[i];
        std::ostringstream line;
        line << std::setw(4) << i + 1 << "  " << std::left << std::setw(22) << r.feature_names[h] << std::right
             << std::setw(16) << percent(r.contributions[h]);
        out << line.str() << "\n";
    }
}

inline void print_selection(std::ostream& out, const SelectionResult& s, const ContributionReport& r) {
    out << "selected " << s.kept.size() << " of " << r.num_features() << " features:";
    for (auto h : s.kept) out << " " << r.feature_names[h];
    out << "\n";
}

inline void print_curves(std::ostream& out, const StepwiseCurve& asc, const StepwiseCurve& desc) {
    out << "step  ascending test %  descending test %\n";
    for (std::size_t t = 0; t < asc.steps.size(); ++t) {
        std::ostringstream line;
        line << std::setw(4) << t + 1 << std::setw(18) << percent(asc.steps[t].test_accuracy) << std::setw(19)
             << percent(desc.steps[t].test_accuracy);
        out << line.str() << "\n";
    }
    out << "area under curve: ascending " << io::format_number(area_under_curve(asc)) << ", descending "
        << io::format_number(area_under_curve(desc)) << "\n";
}

inline void print_comparison(std::ostream& out, const ComparisonRow& row) {
    out << "dataset  full features  full test %  selected features  selected test %\n"
        << row.dataset_name << "  " << row.full_feature_count << "  " << percent(row.full_accuracy) << "  "
        << row.selected_feature_count << "  " << percent(row.selected_accuracy) << "\n";
}

inline Stage last_stage_for(const std::string& subcommand) {
    if (subcommand == "train") return Stage::train;
    if (subcommand == "rank") return Stage::rank;
    if (subcommand == "select") return Stage::select;
    if (subcommand == "stepwise") return Stage::stepwise;
    return Stage::compare;
}

} // namespace detail

// Executes the stages a subcommand asks for. Returns the process exit status;
// failures are reported on `err` and leave earlier artifacts in place.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const RawTable raw =
            run_stage("load", [&] { return load_csv(c.data_path, c.label, c.has_header, c.delimiter); });

        if (c.subcommand == "inspect") {
            const auto summary = run_stage("encode", [&] { return detail::inspect_summary(c, raw); });
            out << summary.dump(2) << "\n";
            return 0;
        }

        PipelineConfig p;
        p.dataset_name = c.dataset_name;
        p.seed = c.seed;
        p.train = c.train;
        p.efast = c.efast;
        p.selection = c.selection;
        p.workers = c.workers;
        p.out_dir = c.out_dir;
        p.last_stage = detail::last_stage_for(c.subcommand);
        if (c.report_path) p.report = run_stage("load", [&] { return io::read_report(*c.report_path); });

        const auto r = run_pipeline(raw, p);
        const auto reached = [&](Stage s) { return static_cast<int>(s) <= static_cast<int>(p.last_stage); };
        if (r.training) detail::print_training(out, *r.training);
        if (reached(Stage::rank)) detail::print_ranking(out, r.report);
        if (reached(Stage::select) && p.last_stage != Stage::stepwise)
            detail::print_selection(out, r.selection, r.report);
        if (reached(Stage::stepwise)) detail::print_curves(out, r.ascending, r.descending);
        if (reached(Stage::compare)) detail::print_comparison(out, r.comparison);
        if (c.out_dir) out << "artifacts written to " << c.out_dir->string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace safs::cli
