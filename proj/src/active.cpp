#include "advml/active.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advml/rng.hpp"

namespace advml {

std::string to_string(SelectionKind kind) { return kind == SelectionKind::margin ? "margin" : "closest_k"; }

SelectionKind parse_selection_kind(std::string_view name) {
    if (name == "margin") return SelectionKind::margin;
    if (name == "closest_k") return SelectionKind::closest_k;
    throw InputError("unknown selection strategy '" + std::string(name) + "'");
}

std::vector<std::size_t> select_uncertain_indices(std::span<const double> scores, double threshold,
                                                  const SelectionStrategy& strategy) {
    std::vector<std::size_t> picked;
    if (strategy.kind == SelectionKind::margin) {
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (std::abs(scores[i] - threshold) <= strategy.margin) picked.push_back(i);
        return picked;
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(scores[a] - threshold) < std::abs(scores[b] - threshold);
    });
    order.resize(std::min(strategy.k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<Sample> select_uncertain(const SubstituteClassifier& substitute, std::span<const Sample> pool,
                                     const SelectionStrategy& strategy) {
    const auto scores = substitute.score_all(pool);
    std::vector<Sample> out;
    for (auto i : select_uncertain_indices(scores, substitute.threshold, strategy)) out.push_back(pool[i]);
    return out;
}

nlohmann::json to_json(const RoundReport& r) {
    return nlohmann::json{{"round", r.round},
                          {"pool_drawn", r.pool_drawn},
                          {"selected", r.selected},
                          {"budget_consumed", r.budget_consumed},
                          {"training_size", r.training_size},
                          {"max_selected_distance", r.max_selected_distance},
                          {"truncated", r.truncated},
                          {"divergence", to_json(r.divergence)}};
}

namespace {

TrainingConfig seeded(const ActiveLearningSetup& setup, const TrainingConfig& profile) {
    TrainingConfig c = profile;
    c.seed = derive_seed(setup.seed, "substitute.train");
    return c;
}

FitResult refit(const ActiveLearningSetup& setup, const SampleSet& labeled) {
    return fit_substitute(labeled, seeded(setup, setup.config), setup.vocab, derive_seed(setup.seed, "substitute.split"));
}

// Labels `batch` within the budget. On exhaustion the partial labels are kept
// and `truncated` is set.
std::vector<Sample> query(Oracle& oracle, std::span<const Sample> batch, QueryBudget& budget, bool& truncated) {
    try {
        return collect_labels(oracle, batch, budget).labeled.samples;
    } catch (const BudgetError& e) {
        truncated = true;
        return e.partial().labeled.samples;
    }
}

} // namespace

FitResult fit_initial(const ActiveLearningSetup& setup) {
    return fit_substitute(setup.initial_labeled, seeded(setup, setup.initial_config), setup.vocab,
                          derive_seed(setup.seed, "substitute.split"));
}

ActiveResult run_active_learning(Oracle& oracle, const ActiveLearningSetup& setup, std::size_t rounds,
                                 std::size_t draw_per_round, const SelectionStrategy& strategy, QueryBudget& budget) {
    ActiveResult result;
    result.substitute = fit_initial(setup).substitute;
    result.initial = evaluate_substitute(result.substitute, setup.test_set);

    std::vector<std::size_t> unseen(setup.pool.size());
    std::iota(unseen.begin(), unseen.end(), std::size_t{0});
    Rng rng(derive_seed(setup.seed, "active.draw"));
    rng.shuffle(std::span<std::size_t>(unseen));
    std::size_t next = 0;

    SampleSet training = setup.initial_labeled;
    for (std::size_t round = 1; round <= rounds; ++round) {
        RoundReport report;
        report.round = round;

        std::vector<Sample> drawn;
        while (drawn.size() < draw_per_round && next < unseen.size()) drawn.push_back(setup.pool[unseen[next++]]);
        report.pool_drawn = drawn.size();

        const auto scores = result.substitute.score_all(drawn);
        std::vector<Sample> chosen;
        for (auto i : select_uncertain_indices(scores, result.substitute.threshold, strategy)) {
            chosen.push_back(drawn[i]);
            report.max_selected_distance =
                std::max(report.max_selected_distance, std::abs(scores[i] - result.substitute.threshold));
        }

        const std::size_t before = budget.consumed;
        auto labeled = query(oracle, chosen, budget, report.truncated);
        report.selected = labeled.size();
        report.budget_consumed = budget.consumed - before;
        for (auto& s : labeled) {
            result.queried.push_back(s.text);
            training.samples.push_back(std::move(s));
        }
        report.training_size = training.size();

        result.substitute = refit(setup, training).substitute;
        report.divergence = evaluate_substitute(result.substitute, setup.test_set);
        result.rounds.push_back(report);
        if (report.truncated) break;
    }
    return result;
}

ActiveResult run_random_benchmark(Oracle& oracle, const ActiveLearningSetup& setup, std::size_t total_additional,
                                  QueryBudget& budget) {
    if (total_additional > setup.pool.size()) throw InputError("benchmark: total_additional exceeds pool size");
    ActiveResult result;
    result.substitute = fit_initial(setup).substitute;
    result.initial = evaluate_substitute(result.substitute, setup.test_set);

    std::vector<std::size_t> order(setup.pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(setup.seed, "benchmark.draw"));
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(total_additional);
    std::sort(order.begin(), order.end());

    std::vector<Sample> drawn;
    for (auto i : order) drawn.push_back(setup.pool[i]);

    RoundReport report;
    report.round = 1;
    report.pool_drawn = drawn.size();
    const std::size_t before = budget.consumed;
    auto labeled = query(oracle, drawn, budget, report.truncated);
    report.selected = labeled.size();
    report.budget_consumed = budget.consumed - before;

    SampleSet training = setup.initial_labeled;
    for (auto& s : labeled) {
        result.queried.push_back(s.text);
        training.samples.push_back(std::move(s));
    }
    report.training_size = training.size();
    if (report.selected > 0) result.substitute = refit(setup, training).substitute;
    report.divergence = evaluate_substitute(result.substitute, setup.test_set);
    result.rounds.push_back(report);
    return result;
}

} // namespace advml
