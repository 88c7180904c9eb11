#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "advml/corpus.hpp"
#include "advml/extract.hpp"
#include "advml/nnet.hpp"
#include "advml/oracle.hpp"

namespace advml {

enum class SelectionKind { margin, closest_k };

std::string to_string(SelectionKind kind);
SelectionKind parse_selection_kind(std::string_view name);

// Which drawn samples are worth an oracle call. Only the field belonging to
// the active kind is read.
struct SelectionStrategy {
    SelectionKind kind = SelectionKind::margin;
    double margin = 0.25;
    std::size_t k = 0;

    static SelectionStrategy within_margin(double margin) { return {SelectionKind::margin, margin, 0}; }
    static SelectionStrategy closest(std::size_t k) { return {SelectionKind::closest_k, 0.0, k}; }
};

// Indices into `scores`, ascending.
std::vector<std::size_t> select_uncertain_indices(std::span<const double> scores, double threshold,
                                                  const SelectionStrategy& strategy);

// Pool samples whose score lies closest to the substitute's threshold, in pool order.
std::vector<Sample> select_uncertain(const SubstituteClassifier& substitute, std::span<const Sample> pool,
                                     const SelectionStrategy& strategy);

struct RoundReport {
    std::size_t round = 0;
    std::size_t pool_drawn = 0;
    std::size_t selected = 0;
    std::size_t budget_consumed = 0;
    std::size_t training_size = 0;
    // Largest |score - threshold| among selected samples at selection time.
    double max_selected_distance = 0.0;
    bool truncated = false;
    DivergenceReport divergence;
};

nlohmann::json to_json(const RoundReport& report);

// Inputs shared by an active-learning run and its paired benchmark.
struct ActiveLearningSetup {
    SampleSet initial_labeled;
    std::vector<Sample> pool;
    // Labeled by the target; fixed for the run and never used for training.
    SampleSet test_set;
    Vocabulary vocab;
    // Profile for the substitute fitted on initial_labeled alone.
    TrainingConfig initial_config = full_data_profile();
    // Profile for every refit after new labels arrive.
    TrainingConfig config = limited_data_profile();
    std::uint64_t seed = 0;
};

struct ActiveResult {
    SubstituteClassifier substitute;
    DivergenceReport initial;
    std::vector<RoundReport> rounds;
    // Every text sent to the oracle, in order.
    std::vector<std::string> queried;
};

// The substitute trained on the initial labels alone, exactly as both
// run_active_learning and run_random_benchmark start from.
FitResult fit_initial(const ActiveLearningSetup& setup);

// Each round draws unseen pool samples, scores them with the current
// substitute, queries the oracle only for the selected ones and retrains from
// scratch on everything labeled so far. Stops early, flagging the round as
// truncated, when the budget runs out.
ActiveResult run_active_learning(Oracle& oracle, const ActiveLearningSetup& setup, std::size_t rounds,
                                 std::size_t draw_per_round, const SelectionStrategy& strategy, QueryBudget& budget);

// Spends total_additional queries on uniformly drawn unseen pool samples and
// retrains once.
ActiveResult run_random_benchmark(Oracle& oracle, const ActiveLearningSetup& setup, std::size_t total_additional,
                                  QueryBudget& budget);

} // namespace advml
