// Ranks the inputs of a synthetic three-class problem where only the first two
// of six features carry signal.
#include "safs/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <string>

int main() {
    safs::Rng rng(11);
    safs::RawTable raw;
    raw.column_names = {"signal_a", "signal_b", "noise_1", "noise_2", "noise_3", "noise_4", "class"};
    raw.label_column = 6;
    for (int i = 0; i < 900; ++i) {
        std::vector<std::string> row;
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const int label = x[0] + x[1] > 0.5 ? 2 : (x[0] - x[1] > 0.0 ? 1 : 0);
        for (double v : x) row.push_back(std::to_string(v));
        row.push_back("c" + std::to_string(label));
        raw.rows.push_back(std::move(row));
    }

    safs::PipelineConfig cfg;
    cfg.seed = 3;
    cfg.last_stage = safs::Stage::select;
    const auto result = safs::run_pipeline(raw, cfg);

    std::printf("feature     contribution %%\n");
    for (auto h : result.report.ranking)
        std::printf("%-10s  %6.2f\n", result.report.feature_names[h].c_str(), 100.0 * result.report.contributions[h]);
    std::printf("kept %zu features\n", result.selection.kept.size());
    return 0;
}
