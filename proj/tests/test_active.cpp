#include <gtest/gtest.h>

#include <set>

#include "advml/active.hpp"
#include "advml/corpus.hpp"
#include "advml/errors.hpp"
#include "advml/oracle.hpp"
#include "advml/rng.hpp"

using namespace advml;

namespace {

struct Fixture {
    std::unique_ptr<OracleService> oracle;
    ActiveLearningSetup setup;
};

Fixture make_fixture(std::size_t pool_size = 600) {
    auto corpus = generate_corpus(1200 + pool_size, 200, 0.3, 41);
    Fixture f;
    SampleSet target;
    target.samples.assign(corpus.samples.begin(), corpus.samples.begin() + 800);
    f.oracle = std::make_unique<OracleService>(target, TargetKind::naive_bayes, 1, OracleOptions{.calls_per_day = 1000});
    const auto model = f.oracle->original_model();
    auto relabel = [&](std::size_t lo, std::size_t hi) {
        SampleSet out;
        for (std::size_t i = lo; i < hi; ++i) out.samples.push_back(Sample{corpus.samples[i].text, model.classify(corpus.samples[i].text)});
        return out;
    };
    f.setup.initial_labeled = relabel(800, 900);
    f.setup.test_set = relabel(900, 1200);
    for (std::size_t i = 1200; i < corpus.size(); ++i) f.setup.pool.push_back(make_sample(corpus.samples[i].text));
    SampleSet all;
    all.samples.assign(corpus.samples.begin() + 800, corpus.samples.end());
    f.setup.vocab = build_vocabulary(all, 2000);
    f.setup.seed = 5;
    return f;
}

} // namespace

TEST(SelectUncertain, MarginExample) {
    const std::vector<double> scores{0.10, 0.17, 0.90};
    EXPECT_EQ(select_uncertain_indices(scores, 0.15, SelectionStrategy::within_margin(0.1)),
              (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(select_uncertain_indices(scores, 0.15, SelectionStrategy::within_margin(1.0)),
              (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_TRUE(select_uncertain_indices(scores, 0.5, SelectionStrategy::within_margin(0.0)).empty());
}

TEST(SelectUncertain, ClosestK) {
    const std::vector<double> scores{0.9, 0.52, 0.1, 0.45, 0.5};
    EXPECT_EQ(select_uncertain_indices(scores, 0.5, SelectionStrategy::closest(2)), (std::vector<std::size_t>{1, 4}));
    EXPECT_TRUE(select_uncertain_indices(scores, 0.5, SelectionStrategy::closest(0)).empty());
    EXPECT_EQ(select_uncertain_indices(scores, 0.5, SelectionStrategy::closest(99)).size(), 5u);
}

TEST(SelectUncertain, ClosestKMatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        std::vector<double> scores(1 + rng.below(40));
        for (auto& s : scores) s = rng.uniform();
        const double t = rng.uniform();
        const std::size_t k = rng.below(scores.size() + 1);
        const auto picked = select_uncertain_indices(scores, t, SelectionStrategy::closest(k));
        ASSERT_EQ(picked.size(), k);
        double worst_in = 0.0, best_out = 2.0;
        std::set<std::size_t> in(picked.begin(), picked.end());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double d = std::abs(scores[i] - t);
            if (in.count(i)) worst_in = std::max(worst_in, d);
            else best_out = std::min(best_out, d);
        }
        EXPECT_LE(worst_in, best_out);
    }
}

TEST(SelectionKind, NamesRoundTrip) {
    EXPECT_EQ(parse_selection_kind("margin"), SelectionKind::margin);
    EXPECT_EQ(parse_selection_kind(to_string(SelectionKind::closest_k)), SelectionKind::closest_k);
    EXPECT_THROW(parse_selection_kind("entropy"), InputError);
}

TEST(ActiveLearning, ZeroRoundsIsInitialSubstitute) {
    auto f = make_fixture();
    QueryBudget budget{10000, 0};
    const auto result = run_active_learning(*f.oracle, f.setup, 0, 100, SelectionStrategy::closest(10), budget);
    EXPECT_TRUE(result.rounds.empty());
    EXPECT_EQ(budget.consumed, 0u);
    EXPECT_EQ(result.substitute, fit_initial(f.setup).substitute);
}

TEST(ActiveLearning, QueriesOnlySelectedAndNeverRepeats) {
    auto f = make_fixture();
    QueryBudget budget{10000, 0};
    const auto result = run_active_learning(*f.oracle, f.setup, 3, 150, SelectionStrategy::closest(40), budget);
    ASSERT_EQ(result.rounds.size(), 3u);
    EXPECT_EQ(budget.consumed, 120u);
    EXPECT_EQ(f.oracle->stats().total_calls, 120u);
    std::set<std::string> unique(result.queried.begin(), result.queried.end());
    EXPECT_EQ(unique.size(), result.queried.size());
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(result.rounds[r].pool_drawn, 150u);
        EXPECT_EQ(result.rounds[r].selected, 40u);
        EXPECT_EQ(result.rounds[r].training_size, 100u + 40u * (r + 1));
    }
}

TEST(ActiveLearning, PoolExhaustionStopsDrawing) {
    auto f = make_fixture(120);
    QueryBudget budget{10000, 0};
    const auto result = run_active_learning(*f.oracle, f.setup, 3, 100, SelectionStrategy::within_margin(1.0), budget);
    EXPECT_EQ(result.rounds[0].pool_drawn, 100u);
    EXPECT_EQ(result.rounds[1].pool_drawn, 20u);
    EXPECT_EQ(result.rounds[2].pool_drawn, 0u);
    EXPECT_EQ(budget.consumed, 120u);
}

TEST(ActiveLearning, BudgetTruncatesRound) {
    auto f = make_fixture();
    QueryBudget budget{30, 0};
    const auto result = run_active_learning(*f.oracle, f.setup, 3, 100, SelectionStrategy::closest(20), budget);
    ASSERT_EQ(result.rounds.size(), 2u);
    EXPECT_FALSE(result.rounds[0].truncated);
    EXPECT_TRUE(result.rounds[1].truncated);
    EXPECT_EQ(result.rounds[1].selected, 10u);
    EXPECT_EQ(budget.consumed, 30u);
}

TEST(ActiveLearning, Deterministic) {
    auto f = make_fixture();
    auto g = make_fixture();
    QueryBudget b1{10000, 0}, b2{10000, 0};
    const auto a = run_active_learning(*f.oracle, f.setup, 2, 100, SelectionStrategy::closest(30), b1);
    const auto b = run_active_learning(*g.oracle, g.setup, 2, 100, SelectionStrategy::closest(30), b2);
    EXPECT_EQ(a.queried, b.queried);
    EXPECT_EQ(a.substitute, b.substitute);
}

TEST(RandomBenchmark, SpendsExactlyTheRequestedBudget) {
    auto f = make_fixture();
    QueryBudget active_budget{10000, 0};
    const auto active = run_active_learning(*f.oracle, f.setup, 1, 300, SelectionStrategy::closest(77), active_budget);
    QueryBudget bench_budget{10000, 0};
    const auto bench = run_random_benchmark(*f.oracle, f.setup, active_budget.consumed, bench_budget);
    EXPECT_EQ(bench_budget.consumed, active_budget.consumed);
    EXPECT_EQ(bench.rounds.back().training_size, active.rounds.back().training_size);
    EXPECT_EQ(bench.initial, active.initial);
    std::set<std::string> unique(bench.queried.begin(), bench.queried.end());
    EXPECT_EQ(unique.size(), 77u);
}

TEST(RandomBenchmark, ZeroAdditionalKeepsInitial) {
    auto f = make_fixture();
    QueryBudget budget{10, 0};
    const auto bench = run_random_benchmark(*f.oracle, f.setup, 0, budget);
    EXPECT_EQ(bench.substitute, fit_initial(f.setup).substitute);
    EXPECT_THROW(run_random_benchmark(*f.oracle, f.setup, f.setup.pool.size() + 1, budget), InputError);
}
