#pragma once

#include "safs/efast.hpp"
#include "safs/error.hpp"
#include "safs/fnn.hpp"
#include "safs/matrix.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace safs {

// Saliency of each input feature of a trained classifier.
//
// te_matrix(h, k) is the total effect of feature h on the probability of class
// k. A feature's summed effect s_total[h] = sum_k te_matrix(h, k) is normalized
// over features to give its contribution share.
struct ContributionReport {
    Matrix te_matrix;                   // H x K
    std::vector<double> s_total;        // H
    std::vector<double> contributions;  // H fractions summing to 1
    std::vector<std::size_t> ranking;   // feature indices, most salient first
    std::vector<std::string> feature_names;
    bool uniform_fallback = false;      // every s_total was zero

    std::size_t num_features() const noexcept { return s_total.size(); }
};

struct SelectionResult {
    std::vector<std::size_t> kept;     // in ranking order
    std::vector<std::size_t> dropped;  // in ranking order
    double threshold = 0.0;
};

// Feature indices sorted by contribution, descending; ties go to the lower index.
inline std::vector<std::size_t> rank_by_contribution(std::span<const double> contributions) {
    std::vector<std::size_t> order(contributions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return contributions[a] > contributions[b]; });
    return order;
}

// Aggregates a total-effect table into a report.
inline ContributionReport build_report(Matrix te_matrix, std::vector<std::string> feature_names) {
    const std::size_t H = te_matrix.rows();
    if (feature_names.size() != H)
        throw ConfigError("report has " + std::to_string(H) + " features but " +
                          std::to_string(feature_names.size()) + " names");

    ContributionReport report;
    report.feature_names = std::move(feature_names);
    report.s_total.assign(H, 0.0);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t k = 0; k < te_matrix.cols(); ++k) report.s_total[h] += te_matrix(h, k);

    const double sum = std::accumulate(report.s_total.begin(), report.s_total.end(), 0.0);
    report.contributions.assign(H, H ? 1.0 / static_cast<double>(H) : 0.0);
    if (sum > 0.0) {
        for (std::size_t h = 0; h < H; ++h) report.contributions[h] = report.s_total[h] / sum;
    } else {
        report.uniform_fallback = true;
    }
    report.ranking = rank_by_contribution(report.contributions);
    report.te_matrix = std::move(te_matrix);
    return report;
}

// The class-k output of the network as a scalar function of the input.
inline std::function<double(std::span<const double>)> per_output_model(const NetworkParams& params, ClassIndex k) {
    if (k >= params.outputs()) throw ConfigError("output unit " + std::to_string(k) + " out of range");
    return [params, k](std::span<const double> x) { return forward(params, x).probs[k]; };
}

// Total effect of every feature on every class probability over `space`.
inline ContributionReport compute_report(const NetworkParams& params, const efast::InputSpace& space,
                                         const efast::EfastConfig& cfg, std::vector<std::string> feature_names) {
    if (space.dims() != params.inputs())
        throw ConfigError("input space has " + std::to_string(space.dims()) + " factors, network has " +
                          std::to_string(params.inputs()) + " inputs");
    // all K class models share the same sample curve per (feature, resample)
    auto model = [&params](std::span<const double> x, std::span<double> out) {
        std::vector<double> hidden(params.hidden());
        forward_into(params, x, hidden, out);
    };
    auto table = efast::sensitivity_table(model, params.outputs(), space, cfg);
    return build_report(std::move(table.total_effect), std::move(feature_names));
}

// Keeps every feature whose contribution is at least `threshold`.
inline SelectionResult select(const ContributionReport& report, double threshold) {
    if (report.contributions.empty()) throw ConfigError("empty report");
    const double top = *std::max_element(report.contributions.begin(), report.contributions.end());
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be nonnegative");
    if (threshold > top) throw ConfigError("threshold " + std::to_string(threshold) +
                                           " exceeds the largest contribution " + std::to_string(top));
    SelectionResult out;
    out.threshold = threshold;
    for (auto h : report.ranking) (report.contributions[h] >= threshold ? out.kept : out.dropped).push_back(h);
    return out;
}

// Keeps the k most salient features.
inline SelectionResult select_top_k(const ContributionReport& report, std::size_t k) {
    const std::size_t H = report.ranking.size();
    if (k == 0 || k > H) throw ConfigError("top-k must be in [1, " + std::to_string(H) + "]");
    SelectionResult out;
    out.kept.assign(report.ranking.begin(), report.ranking.begin() + static_cast<std::ptrdiff_t>(k));
    out.dropped.assign(report.ranking.begin() + static_cast<std::ptrdiff_t>(k), report.ranking.end());
    out.threshold = report.contributions[report.ranking[k - 1]];
    return out;
}

inline double default_threshold(std::size_t features) { return 0.5 / static_cast<double>(features); }

} // namespace safs
