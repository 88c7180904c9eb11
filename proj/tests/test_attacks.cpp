#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "advml/attacks.hpp"
#include "advml/corpus.hpp"
#include "advml/errors.hpp"
#include "advml/oracle.hpp"
#include "advml/rng.hpp"

using namespace advml;

namespace {

std::vector<Sample> pool_of(std::size_t n) {
    std::vector<Sample> pool;
    for (std::size_t i = 0; i < n; ++i) pool.push_back(make_sample("item " + std::to_string(i)));
    return pool;
}

SubstituteClassifier small_substitute(const SampleSet& corpus) {
    TrainingConfig c = limited_data_profile();
    c.seed = 3;
    return fit_substitute(corpus, c, build_vocabulary(corpus, 200), 4).substitute;
}

} // namespace

TEST(Evasion, AverageErrorPicksNearest) {
    const std::vector<double> scores{0.9, 0.48, 0.1, 0.55, 0.5, 0.3};
    bool is_short = true;
    EXPECT_EQ(select_evasion_indices(scores, 0.5, 3, EvasionObjective::average_error, is_short),
              (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_FALSE(is_short);
}

TEST(Evasion, OneSidedObjectives) {
    const std::vector<double> scores{0.9, 0.48, 0.1, 0.55, 0.5, 0.3};
    bool is_short = false;
    // Side 2 is score >= threshold.
    EXPECT_EQ(select_evasion_indices(scores, 0.5, 2, EvasionObjective::force_1_to_2, is_short),
              (std::vector<std::size_t>{3, 4}));
    EXPECT_EQ(select_evasion_indices(scores, 0.5, 2, EvasionObjective::force_2_to_1, is_short),
              (std::vector<std::size_t>{1, 5}));
    EXPECT_FALSE(is_short);
    EXPECT_EQ(select_evasion_indices(scores, 0.5, 4, EvasionObjective::force_2_to_1, is_short).size(), 3u);
    EXPECT_TRUE(is_short);
}

TEST(Evasion, TiesGoToEarlierSample) {
    const std::vector<double> scores{0.6, 0.4, 0.6, 0.4};
    bool is_short = false;
    EXPECT_EQ(select_evasion_indices(scores, 0.5, 2, EvasionObjective::average_error, is_short),
              (std::vector<std::size_t>{0, 1}));
}

TEST(Evasion, NLargerThanPoolRejected) {
    const std::vector<double> scores{0.1};
    bool is_short = false;
    EXPECT_THROW(select_evasion_indices(scores, 0.5, 2, EvasionObjective::average_error, is_short), InputError);
}

TEST(Evasion, ErrorRates) {
    const std::vector<Sample> selected{make_sample("a", Label::one), make_sample("b", Label::two)};
    const std::vector<Sample> baseline{make_sample("c", Label::one), make_sample("d", Label::one),
                                       make_sample("e", Label::two), make_sample("f", Label::two)};
    const std::vector<Label> on_selected{Label::two, Label::two};
    const std::vector<Label> on_baseline{Label::one, Label::one, Label::two, Label::one};
    const auto out = evaluate_evasion(on_selected, selected, on_baseline, baseline);
    EXPECT_DOUBLE_EQ(out.selected_error_rate, 0.5);
    EXPECT_DOUBLE_EQ(out.baseline_error_rate, 0.25);
    EXPECT_EQ(out.selected_count, 2u);
    const std::vector<Sample> unlabeled{make_sample("x")};
    const std::vector<Label> one{Label::one};
    EXPECT_THROW(evaluate_evasion(one, unlabeled, one, unlabeled), DataError);
}

TEST(Poison, CountPerSideFloors) {
    EXPECT_EQ(poison_count_per_side(1000, 10.0), 50u);
    EXPECT_EQ(poison_count_per_side(999, 10.0), 49u);
    EXPECT_EQ(poison_count_per_side(19, 10.0), 0u);
    EXPECT_EQ(poison_count_per_side(20, 10.0), 1u);
    EXPECT_EQ(poison_count_per_side(100, 0.0), 0u);
    EXPECT_EQ(poison_count_per_side(100, 100.0), 50u);
    EXPECT_THROW(poison_count_per_side(100, 101.0), InputError);
    EXPECT_THROW(poison_count_per_side(100, -1.0), InputError);
}

TEST(Poison, PlanMatchesBruteForceRanking) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Rng rng(seed);
        const std::size_t n = 1 + rng.below(200);
        const auto pool = pool_of(n);
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.uniform();
        const double t = rng.uniform(), p = rng.uniform(0.0, 100.0);
        const auto plan = plan_poison(pool, scores, t, p);
        const std::size_t k = poison_count_per_side(n, p);
        ASSERT_EQ(plan.items.size(), 2 * k);

        auto sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        std::multiset<double> expected(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k));
        expected.insert(sorted.end() - static_cast<std::ptrdiff_t>(k), sorted.end());
        std::multiset<double> got;
        for (const auto& item : plan.items) {
            got.insert(item.score);
            EXPECT_EQ(item.original, SubstituteClassifier::decide(item.score, t));
            EXPECT_EQ(item.flipped, flip(item.original));
        }
        EXPECT_EQ(got, expected);
    }
}

TEST(Poison, EmptyPoolRejected) {
    EXPECT_THROW(plan_poison({}, {}, 0.5, 10.0), InputError);
}

TEST(Poison, RandomFlipBaselineDrawsDistinctSamples) {
    const auto corpus = generate_corpus(200, 40, 0.3, 2);
    const auto substitute = small_substitute(corpus);
    const auto a = plan_random_flip_baseline(substitute, corpus.samples, 30, 9);
    const auto b = plan_random_flip_baseline(substitute, corpus.samples, 30, 9);
    ASSERT_EQ(a.items.size(), 30u);
    std::set<std::string> texts;
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        texts.insert(a.items[i].text);
        EXPECT_EQ(a.items[i].text, b.items[i].text);
        EXPECT_EQ(a.items[i].original, substitute.predict(a.items[i].text));
        EXPECT_EQ(a.items[i].flipped, flip(a.items[i].original));
    }
    EXPECT_EQ(texts.size(), 30u);
    EXPECT_NE(plan_random_flip_baseline(substitute, corpus.samples, 30, 10).items[0].text + 
              plan_random_flip_baseline(substitute, corpus.samples, 30, 10).items[29].text,
              a.items[0].text + a.items[29].text);
    EXPECT_THROW(plan_random_flip_baseline(substitute, corpus.samples, 201, 9), InputError);
}

TEST(Causative, EmptyPlanChangesNothing) {
    const auto corpus = generate_corpus(600, 100, 0.3, 6);
    SampleSet target;
    target.samples.assign(corpus.samples.begin(), corpus.samples.begin() + 400);
    OracleService oracle(target, TargetKind::naive_bayes, 1, {.calls_per_day = 100});
    const std::vector<Sample> eval(corpus.samples.begin() + 400, corpus.samples.end());
    QueryBudget budget{1000, 0};
    const auto report = run_causative(oracle, PoisonPlan{}, eval, budget);
    EXPECT_EQ(report.divergence.d_avg, 0.0);
    EXPECT_EQ(report.calls_used, 400u);
    EXPECT_EQ(report.days_elapsed, 3u);
}

TEST(Causative, RankSelectedFlipsShiftTheTarget) {
    const auto corpus = generate_corpus(3000, 200, 0.3, 7);
    SampleSet target;
    target.samples.assign(corpus.samples.begin(), corpus.samples.begin() + 1000);
    OracleService oracle(target, TargetKind::naive_bayes, 1, {.calls_per_day = 100000});
    const std::vector<Sample> pool(corpus.samples.begin() + 1000, corpus.samples.begin() + 2000);
    const std::vector<Sample> eval(corpus.samples.begin() + 2000, corpus.samples.end());
    SampleSet labeled;
    labeled.samples.assign(corpus.samples.begin() + 1000, corpus.samples.begin() + 1500);
    const auto substitute = small_substitute(labeled);
    QueryBudget budget{100000, 0};
    const auto report = run_causative(oracle, plan_poison(substitute, pool, 40.0), eval, budget);
    EXPECT_EQ(report.plan_size, 400u);
    EXPECT_GT(report.divergence.d_avg, 0.0);
    EXPECT_EQ(oracle.pending_feedback(), 0u);
}

TEST(EvasionObjective, NamesRoundTrip) {
    for (auto o : {EvasionObjective::average_error, EvasionObjective::force_1_to_2, EvasionObjective::force_2_to_1})
        EXPECT_EQ(parse_evasion_objective(to_string(o)), o);
    EXPECT_THROW(parse_evasion_objective("x"), InputError);
}
