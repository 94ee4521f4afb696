#pragma once

#include "safs/dataset.hpp"
#include "safs/error.hpp"
#include "safs/fnn.hpp"
#include "safs/parallel.hpp"
#include "safs/saliency.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace safs {

// Stepwise evaluation of a ranking: features are added one at a time in
// ascending or descending saliency order and a fresh network is trained on
// each prefix.
enum class Order { ascending, descending };

inline const char* to_string(Order o) { return o == Order::ascending ? "ascending" : "descending"; }

struct CurveStep {
    std::vector<std::size_t> subset;  // features in the order they were added
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;

    std::size_t feature_added() const { return subset.back(); }
};

struct StepwiseCurve {
    Order order = Order::descending;
    std::vector<CurveStep> steps;
};

struct ComparisonRow {
    std::string dataset_name;
    std::size_t full_feature_count = 0;
    double full_accuracy = 0.0;
    std::size_t selected_feature_count = 0;
    double selected_accuracy = 0.0;

    friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

// Order in which features are added: the ranking for descending, reversed for ascending.
inline std::vector<std::size_t> addition_order(const std::vector<std::size_t>& ranking, Order order) {
    std::vector<std::size_t> out = ranking;
    if (order == Order::ascending) std::reverse(out.begin(), out.end());
    return out;
}

inline void check_permutation(const std::vector<std::size_t>& ranking, std::size_t H) {
    std::vector<bool> seen(H, false);
    if (ranking.size() != H) throw ConfigError("ranking must list every feature exactly once");
    for (auto h : ranking) {
        if (h >= H || seen[h]) throw ConfigError("ranking must list every feature exactly once");
        seen[h] = true;
    }
}

// Step t (0-based) trains with seed cfg.seed + t on the first t+1 features of
// the chosen order. Steps are independent and run on up to `workers` threads.
inline StepwiseCurve stepwise(const SplitDataset& data, const std::vector<std::size_t>& ranking, Order order,
                              const TrainConfig& cfg, std::size_t workers = 1) {
    const std::size_t H = data.train.num_features();
    check_permutation(ranking, H);
    const auto sequence = addition_order(ranking, order);

    StepwiseCurve curve{order, std::vector<CurveStep>(H)};
    parallel_for(H, workers, [&](std::size_t t) {
        CurveStep& step = curve.steps[t];
        step.subset.assign(sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(t + 1));
        // ascending index order: equal feature sets give identical networks
        auto sorted = step.subset;
        std::sort(sorted.begin(), sorted.end());
        const auto restricted = select_features(data, sorted);
        TrainConfig step_cfg = cfg;
        step_cfg.seed = cfg.seed + t;
        try {
            const auto report = train(restricted, step_cfg);
            step.validation_accuracy = accuracy(report.best_params, restricted.validation);
            step.test_accuracy = accuracy(report.best_params, restricted.test);
        } catch (const TrainingError& e) {
            throw TrainingError("stepwise step " + std::to_string(t + 1) + ": " + e.what());
        }
    });
    return curve;
}

// Trapezoidal area under the test-accuracy curve, unit spacing between steps.
inline double area_under_curve(const StepwiseCurve& curve) {
    double area = 0.0;
    for (std::size_t t = 1; t < curve.steps.size(); ++t)
        area += 0.5 * (curve.steps[t - 1].test_accuracy + curve.steps[t].test_accuracy);
    return area;
}

// Test accuracy with all features against the selected subset. Both networks
// use cfg.seed. Pass `full_model` to reuse an already trained full network.
inline ComparisonRow compare(const SplitDataset& data, const SelectionResult& selection, const TrainConfig& cfg,
                             std::string dataset_name = {}, const NetworkParams* full_model = nullptr) {
    if (selection.kept.empty()) throw ConfigError("selection keeps no features");
    const std::size_t H = data.train.num_features();

    ComparisonRow row;
    row.dataset_name = std::move(dataset_name);
    row.full_feature_count = H;
    row.selected_feature_count = selection.kept.size();
    if (full_model) {
        row.full_accuracy = accuracy(*full_model, data.test);
    } else {
        row.full_accuracy = accuracy(train(data, cfg).best_params, data.test);
    }
    // restricted in ascending index order, so kept == all features reproduces the full run
    auto kept = selection.kept;
    std::sort(kept.begin(), kept.end());
    const auto restricted = select_features(data, kept);
    row.selected_accuracy = accuracy(train(restricted, cfg).best_params, restricted.test);
    return row;
}

} // namespace safs
