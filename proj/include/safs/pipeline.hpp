#pragma once

#include "safs/artifacts.hpp"
#include "safs/dataset.hpp"
#include "safs/efast.hpp"
#include "safs/experiment.hpp"
#include "safs/fnn.hpp"
#include "safs/random.hpp"
#include "safs/saliency.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace safs {

// A pipeline stage failed; what() starts with the stage name.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

// Every stage seed comes from the one user seed.
struct StageSeeds {
    std::uint64_t split = 0;
    std::uint64_t train = 0;
    std::uint64_t efast = 0;
};

inline StageSeeds derive_stage_seeds(std::uint64_t seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

struct PreparedData {
    SplitDataset data;  // normalized with training statistics
    NormalizationStats normalization;
};

inline PreparedData prepare_data(const Dataset& encoded, SplitFractions fractions, std::uint64_t split_seed) {
    PreparedData out;
    out.data = normalize(split(encoded, fractions, split_seed), &out.normalization);
    return out;
}

inline efast::InputSpace input_space(const Dataset& train) { return {train.feature_ranges}; }

inline io::ModelCheckpoint make_checkpoint(const NetworkParams& params, const PreparedData& prepared) {
    const auto& tr = prepared.data.train;
    return {params, prepared.normalization, tr.feature_names, tr.class_names, tr.feature_ranges};
}

// Threshold cut, top-k cut, or neither (default threshold of half the uniform share).
struct SelectionRule {
    std::optional<double> threshold;
    std::optional<std::size_t> top_k;
};

inline SelectionResult apply_selection(const ContributionReport& report, const SelectionRule& rule) {
    if (rule.threshold && rule.top_k) throw ConfigError("choose either a threshold or top-k, not both");
    if (rule.top_k) return select_top_k(report, *rule.top_k);
    return select(report, rule.threshold.value_or(default_threshold(report.num_features())));
}

// Pipeline stages in execution order; a run stops after `last_stage`.
enum class Stage { train, rank, select, stepwise, compare };

inline const char* to_string(Stage s) {
    switch (s) {
    case Stage::train: return "train";
    case Stage::rank: return "rank";
    case Stage::select: return "select";
    case Stage::stepwise: return "stepwise";
    case Stage::compare: return "compare";
    }
    return "?";
}

struct PipelineConfig {
    std::string dataset_name;
    std::uint64_t seed = 0;
    SplitFractions fractions;
    TrainConfig train;         // seed is replaced by the derived train seed
    efast::EfastConfig efast;  // seed and workers are replaced
    SelectionRule selection;
    std::size_t workers = 1;
    std::optional<std::filesystem::path> out_dir;
    Stage last_stage = Stage::compare;
    // Ranking from an earlier run; skips training and ranking when set.
    std::optional<ContributionReport> report;
};

struct PipelineResult {
    PreparedData prepared;
    std::optional<TrainReport> training;
    ContributionReport report;
    SelectionResult selection;
    StepwiseCurve ascending;
    StepwiseCurve descending;
    ComparisonRow comparison;
};

// File names inside an output directory.
namespace artifact {
inline constexpr const char* model = "model.json";
inline constexpr const char* history = "train_history.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* contributions = "contributions.csv";
inline constexpr const char* selection = "selection.json";
inline constexpr const char* curve_ascending = "curve_ascending.csv";
inline constexpr const char* curve_descending = "curve_descending.csv";
inline constexpr const char* comparison = "comparison.json";
} // namespace artifact

inline void check_report_matches(const ContributionReport& report, const Dataset& train) {
    if (report.feature_names != train.feature_names)
        throw ConfigError("report features do not match the dataset's features");
}

// encode -> split -> normalize -> train -> rank -> select -> stepwise (both
// orders) -> compare, stopping after cfg.last_stage. With out_dir set, each
// stage's artifact is written as soon as the stage finishes.
inline PipelineResult run_pipeline(const RawTable& raw, const PipelineConfig& cfg) {
    const auto seeds = derive_stage_seeds(cfg.seed);
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seeds.train;
    efast::EfastConfig efast_cfg = cfg.efast;
    efast_cfg.seed = seeds.efast;
    efast_cfg.workers = cfg.workers;
    const auto out = [&](const char* name) { return *cfg.out_dir / name; };
    const auto reached = [&](Stage s) { return static_cast<int>(s) <= static_cast<int>(cfg.last_stage); };

    PipelineResult r;
    const auto encoded = run_stage("encode", [&] { return encode(raw); });
    r.prepared = run_stage("split", [&] { return prepare_data(encoded, cfg.fractions, seeds.split); });
    const auto& data = r.prepared.data;

    if (cfg.report) {
        run_stage("rank", [&] { check_report_matches(*cfg.report, data.train); });
        r.report = *cfg.report;
    } else {
        r.training = run_stage("train", [&] { return train(data, train_cfg); });
        if (cfg.out_dir) {
            io::write_model(out(artifact::model), make_checkpoint(r.training->best_params, r.prepared));
            io::write_history_csv(out(artifact::history), *r.training);
        }
        if (!reached(Stage::rank)) return r;

        r.report = run_stage("rank", [&] {
            return compute_report(r.training->best_params, input_space(data.train), efast_cfg,
                                  data.train.feature_names);
        });
        if (cfg.out_dir) {
            io::write_report(out(artifact::report), r.report);
            io::write_contributions_csv(out(artifact::contributions), r.report);
        }
    }
    if (!reached(Stage::select)) return r;

    r.selection = run_stage("select", [&] { return apply_selection(r.report, cfg.selection); });
    if (cfg.out_dir) io::write_selection(out(artifact::selection), r.selection, r.report.feature_names);
    if (!reached(Stage::stepwise)) return r;

    r.ascending = run_stage("stepwise",
                            [&] { return stepwise(data, r.report.ranking, Order::ascending, train_cfg, cfg.workers); });
    r.descending = run_stage(
        "stepwise", [&] { return stepwise(data, r.report.ranking, Order::descending, train_cfg, cfg.workers); });
    if (cfg.out_dir) {
        io::write_curve_csv(out(artifact::curve_ascending), r.ascending);
        io::write_curve_csv(out(artifact::curve_descending), r.descending);
    }
    if (!reached(Stage::compare)) return r;

    r.comparison = run_stage("compare", [&] {
        const NetworkParams* full = r.training ? &r.training->best_params : nullptr;
        return compare(data, r.selection, train_cfg, cfg.dataset_name, full);
    });
    if (cfg.out_dir) io::write_comparison(out(artifact::comparison), {r.comparison});
    return r;
}

} // namespace safs
