#include "safs/experiment.hpp"
#include "safs/pipeline.hpp"

#include <gtest/gtest.h>

using namespace safs;

namespace {

// Three informative features of decreasing strength plus one noise feature.
SplitDataset small_problem(std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    const std::size_t L = 240;
    ds.features = Matrix(L, 4);
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t h = 0; h < 4; ++h) ds.features(i, h) = rng.uniform(-1.0, 1.0);
        const double score = 2.0 * ds.features(i, 0) + ds.features(i, 1) + 0.5 * ds.features(i, 2);
        ds.labels.push_back(score > 0.0 ? 1 : 0);
    }
    ds.feature_names = {"a", "b", "c", "noise"};
    ds.class_names = {"n", "p"};
    ds.feature_ranges = empirical_ranges(ds);
    return normalize(split(ds, {}, seed));
}

TrainConfig quick(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = 40;
    cfg.patience_epochs = 5;
    return cfg;
}

} // namespace

TEST(AdditionOrder, DescendingFollowsRankingAscendingReverses) {
    const std::vector<std::size_t> ranking{2, 0, 3, 1};
    EXPECT_EQ(addition_order(ranking, Order::descending), ranking);
    EXPECT_EQ(addition_order(ranking, Order::ascending), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(CheckPermutation, RejectsDuplicatesGapsAndWrongLength) {
    EXPECT_NO_THROW(check_permutation({1, 0, 2}, 3));
    EXPECT_THROW(check_permutation({1, 1, 2}, 3), ConfigError);
    EXPECT_THROW(check_permutation({0, 1, 3}, 3), ConfigError);
    EXPECT_THROW(check_permutation({0, 1}, 3), ConfigError);
}

TEST(Stepwise, CurvesHaveThePrefixProperty) {
    const auto data = small_problem(3);
    const std::vector<std::size_t> ranking{0, 1, 2, 3};
    for (auto order : {Order::ascending, Order::descending}) {
        const auto curve = stepwise(data, ranking, order, quick(7));
        const auto sequence = addition_order(ranking, order);
        ASSERT_EQ(curve.steps.size(), 4u);
        EXPECT_EQ(curve.order, order);
        for (std::size_t t = 0; t < 4; ++t) {
            const auto& s = curve.steps[t];
            EXPECT_EQ(s.subset, std::vector<std::size_t>(sequence.begin(), sequence.begin() + t + 1));
            EXPECT_EQ(s.feature_added(), sequence[t]);
            EXPECT_GE(s.test_accuracy, 0.0);
            EXPECT_LE(s.test_accuracy, 1.0);
        }
    }
}

TEST(Stepwise, FinalStepsOfBothOrdersAgree) {
    const auto data = small_problem(5);
    const std::vector<std::size_t> ranking{1, 3, 0, 2};
    const auto asc = stepwise(data, ranking, Order::ascending, quick(2));
    const auto desc = stepwise(data, ranking, Order::descending, quick(2));
    EXPECT_EQ(asc.steps.back().test_accuracy, desc.steps.back().test_accuracy);
    EXPECT_EQ(asc.steps.back().validation_accuracy, desc.steps.back().validation_accuracy);
}

TEST(Stepwise, StrongFeaturesFirstGivesTheLargerArea) {
    const auto data = small_problem(11);
    const std::vector<std::size_t> ranking{0, 1, 2, 3};
    const auto asc = stepwise(data, ranking, Order::ascending, quick(4));
    const auto desc = stepwise(data, ranking, Order::descending, quick(4));
    EXPECT_GT(area_under_curve(desc), area_under_curve(asc));
}

TEST(Stepwise, SingleFeatureDataset) {
    auto data = small_problem(1);
    data = select_features(data, {0});
    const auto curve = stepwise(data, {0}, Order::descending, quick(1));
    ASSERT_EQ(curve.steps.size(), 1u);
    EXPECT_EQ(curve.steps[0].subset, (std::vector<std::size_t>{0}));
    EXPECT_EQ(area_under_curve(curve), 0.0);
}

TEST(Stepwise, WorkerCountDoesNotChangeTheCurve) {
    const auto data = small_problem(9);
    const std::vector<std::size_t> ranking{3, 2, 1, 0};
    const auto a = stepwise(data, ranking, Order::descending, quick(3), 1);
    const auto b = stepwise(data, ranking, Order::descending, quick(3), 4);
    for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_EQ(a.steps[t].test_accuracy, b.steps[t].test_accuracy);
        EXPECT_EQ(a.steps[t].validation_accuracy, b.steps[t].validation_accuracy);
    }
}

TEST(Stepwise, InvalidRankingIsConfigError) {
    EXPECT_THROW(stepwise(small_problem(1), {0, 1, 2}, Order::descending, quick(1)), ConfigError);
}

TEST(AreaUnderCurve, TrapezoidWithUnitSpacing) {
    StepwiseCurve c;
    for (double a : {0.5, 0.7, 0.9}) c.steps.push_back({{0}, 0.0, a});
    EXPECT_DOUBLE_EQ(area_under_curve(c), 0.5 * (0.5 + 0.7) + 0.5 * (0.7 + 0.9));
    EXPECT_EQ(area_under_curve(StepwiseCurve{}), 0.0);
}

TEST(Compare, KeepingEveryFeatureReproducesTheFullRun) {
    const auto data = small_problem(6);
    SelectionResult all{{2, 0, 3, 1}, {}, 0.0};
    const auto row = compare(data, all, quick(8), "toy");
    EXPECT_EQ(row.dataset_name, "toy");
    EXPECT_EQ(row.full_feature_count, 4u);
    EXPECT_EQ(row.selected_feature_count, 4u);
    EXPECT_EQ(row.selected_accuracy, row.full_accuracy);
}

TEST(Compare, ReusedFullModelMatchesRetraining) {
    const auto data = small_problem(6);
    const auto cfg = quick(8);
    const auto full = train(data, cfg);
    SelectionResult some{{0, 1}, {2, 3}, 0.1};
    EXPECT_EQ(compare(data, some, cfg, "", &full.best_params), compare(data, some, cfg));
}

TEST(Compare, EmptySelectionIsConfigError) {
    EXPECT_THROW(compare(small_problem(1), SelectionResult{}, quick(1)), ConfigError);
}
