#include "safs/artifacts.hpp"
#include "safs/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace safs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "safs_artifacts_test";
    fs::create_directories(dir);
    return dir / name;
}

ContributionReport sample_report() {
    Matrix te(3, 2);
    te(0, 0) = 0.1;
    te(0, 1) = 0.2;
    te(1, 0) = 0.7;
    te(1, 1) = 0.65;
    te(2, 0) = 1.0 / 3.0;
    te(2, 1) = 0.0;
    return build_report(std::move(te), {"a", "b", "c"});
}

} // namespace

TEST(FormatNumber, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
        const auto s = io::format_number(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
    EXPECT_EQ(io::format_number(0.5), "0.5");
}

TEST(ModelCheckpoint, RoundTripsBitExactly) {
    io::ModelCheckpoint m{init_params(3, 5, 4, 21), {{0.5, -1.0 / 7.0, 2.0}, {1.0, 0.3, 9.0}}, {"x", "y", "z"},
                          {"p", "q", "r", "s"}, {{-1.0, 2.0}, {0.0, 0.1}, {-3.0, 3.0}}};
    const auto path = scratch("model.json");
    io::write_model(path, m);
    const auto back = io::read_model(path);
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.normalization.means, m.normalization.means);
    EXPECT_EQ(back.normalization.scales, m.normalization.scales);
    EXPECT_EQ(back.feature_names, m.feature_names);
    EXPECT_EQ(back.class_names, m.class_names);
    ASSERT_EQ(back.feature_ranges.size(), 3u);
    EXPECT_EQ(back.feature_ranges[1].hi, 0.1);
}

TEST(ModelCheckpoint, WrongVersionOrShapeIsParseError) {
    io::ModelCheckpoint m{init_params(2, 2, 2, 1), {{0, 0}, {1, 1}}, {"x", "y"}, {"p", "q"}, {{0, 1}, {0, 1}}};
    auto j = io::to_json(m);
    j["version"] = "safs-model/0";
    EXPECT_THROW(io::model_from_json(j), ParseError);
    j = io::to_json(m);
    j["hidden_bias"] = std::vector<double>{1.0};
    EXPECT_THROW(io::model_from_json(j), ParseError);
}

TEST(Report, RoundTripsThroughJson) {
    const auto r = sample_report();
    const auto path = scratch("report.json");
    io::write_report(path, r);
    const auto back = io::read_report(path);
    EXPECT_EQ(back.te_matrix, r.te_matrix);
    EXPECT_EQ(back.s_total, r.s_total);
    EXPECT_EQ(back.contributions, r.contributions);
    EXPECT_EQ(back.ranking, r.ranking);
    EXPECT_EQ(back.feature_names, r.feature_names);
    const auto j = io::parse_json_file(path);
    EXPECT_EQ(j["ranking"][0], r.ranking[0] + 1);  // files are 1-based
}

TEST(Report, ContributionsCsvIsPercentInFeatureOrder) {
    const auto r = sample_report();
    const auto path = scratch("contributions.csv");
    io::write_contributions_csv(path, r);
    const auto rows = io::read_contributions_csv(path);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t h = 0; h < 3; ++h) {
        EXPECT_EQ(rows[h].feature, r.feature_names[h]);
        EXPECT_EQ(rows[h].percent, 100.0 * r.contributions[h]);
    }
}

TEST(Selection, RoundTrips) {
    const auto r = sample_report();
    const auto s = select_top_k(r, 2);
    const auto path = scratch("selection.json");
    io::write_selection(path, s, r.feature_names);
    const auto back = io::read_selection(path);
    EXPECT_EQ(back.kept, s.kept);
    EXPECT_EQ(back.dropped, s.dropped);
    EXPECT_EQ(back.threshold, s.threshold);
    EXPECT_EQ(io::parse_json_file(path)["kept_names"][0], "b");
}

TEST(Curve, RoundTripsAndChecksPrefixes) {
    StepwiseCurve c{Order::ascending, {{{2}, 0.5, 0.25}, {{2, 0}, 0.75, 0.6}, {{2, 0, 1}, 0.8, 1.0 / 3.0}}};
    const auto path = scratch("curve.csv");
    io::write_curve_csv(path, c);
    const auto back = io::read_curve_csv(path, Order::ascending);
    ASSERT_EQ(back.steps.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t) {
        EXPECT_EQ(back.steps[t].subset, c.steps[t].subset);
        EXPECT_EQ(back.steps[t].test_accuracy, c.steps[t].test_accuracy);
        EXPECT_EQ(back.steps[t].validation_accuracy, c.steps[t].validation_accuracy);
    }
    io::write_text(path, "step,n_features,feature_added,val_accuracy,test_accuracy\n1,2,3,0.5,0.5\n");
    EXPECT_THROW(io::read_curve_csv(path, Order::ascending), ParseError);
}

TEST(Comparison, RoundTrips) {
    const std::vector<ComparisonRow> rows{{"waveform", 21, 0.8504, 11, 0.8544}, {"diabetes", 8, 0.78, 2, 0.77}};
    const auto path = scratch("comparison.json");
    io::write_comparison(path, rows);
    EXPECT_EQ(io::read_comparison(path), rows);
}

TEST(History, OneLinePerEpoch) {
    TrainReport t;
    t.history = {{0.9, 1.0}, {0.5, 0.7}};
    const auto path = scratch("history.csv");
    io::write_history_csv(path, t);
    EXPECT_EQ(io::read_text(path), "epoch,train_ce,validation_ce\n1,0.9,1\n2,0.5,0.7\n");
}

TEST(Files, MissingFileAndBadJsonAreErrors) {
    EXPECT_THROW(io::read_text(scratch("does_not_exist.json")), std::runtime_error);
    const auto path = scratch("broken.json");
    io::write_text(path, "{not json");
    EXPECT_THROW(io::parse_json_file(path), ParseError);
}

TEST(Files, WriteCreatesParentDirectories) {
    const auto path = scratch("nested/deeper/file.txt");
    fs::remove_all(path.parent_path());
    io::write_text(path, "ok");
    EXPECT_EQ(io::read_text(path), "ok");
}
