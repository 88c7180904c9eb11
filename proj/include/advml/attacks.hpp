#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "advml/corpus.hpp"
#include "advml/extract.hpp"
#include "advml/oracle.hpp"
#include "advml/target.hpp"

namespace advml {

enum class EvasionObjective { average_error, force_1_to_2, force_2_to_1 };

std::string to_string(EvasionObjective objective);
EvasionObjective parse_evasion_objective(std::string_view name);

struct EvasionSelection {
    std::vector<std::size_t> indices; // into the pool, ascending
    std::vector<Sample> samples;
    // A one-sided objective found fewer than n samples on its side.
    bool is_short = false;
};

// average_error: the n samples nearest the threshold. force_1_to_2: the n
// samples the substitute labels 2 (score >= threshold) with the smallest
// score - threshold; force_2_to_1 mirrors it. Distance ties go to the earlier
// pool sample.
std::vector<std::size_t> select_evasion_indices(std::span<const double> scores, double threshold, std::size_t n,
                                                EvasionObjective objective, bool& is_short);
EvasionSelection select_evasion(const SubstituteClassifier& substitute, std::span<const Sample> pool, std::size_t n,
                                EvasionObjective objective);

struct EvasionOutcome {
    double selected_error_rate = 0.0;
    double baseline_error_rate = 0.0;
    std::size_t selected_count = 0;
    std::size_t baseline_count = 0;
};

// Misclassification rates of the target against the ground-truth labels the
// samples carry. Throws DataError when a sample has no ground truth.
EvasionOutcome evaluate_evasion(std::span<const Label> target_on_selected, std::span<const Sample> selected,
                                std::span<const Label> target_on_baseline, std::span<const Sample> baseline);
EvasionOutcome evaluate_evasion(const TargetModel& target, std::span<const Sample> selected,
                                std::span<const Sample> baseline);

nlohmann::json to_json(const EvasionOutcome& outcome);

struct PoisonItem {
    std::string text;
    Label original; // substitute's label
    Label flipped;
    double score;
};

struct PoisonPlan {
    double p = 0.0;
    std::vector<PoisonItem> items;
};

// Items per side for a pool of `pool_size` at p percent: floor(pool_size * p / 200).
std::size_t poison_count_per_side(std::size_t pool_size, double p);

// Flips the substitute's label on the floor(|pool| p / 200) lowest-scored and
// as many highest-scored pool samples.
PoisonPlan plan_poison(const SubstituteClassifier& substitute, std::span<const Sample> pool, double p);
PoisonPlan plan_poison(std::span<const Sample> pool, std::span<const double> scores, double threshold, double p);

// Control condition: `count` uniformly drawn pool samples with flipped
// substitute labels.
PoisonPlan plan_random_flip_baseline(const SubstituteClassifier& substitute, std::span<const Sample> pool,
                                     std::size_t count, std::uint64_t seed);

struct PoisonReport {
    DivergenceReport divergence; // target before vs after the poisoned retrain
    std::size_t plan_size = 0;
    double p = 0.0;
    std::size_t calls_used = 0;
    std::size_t days_elapsed = 0;
};

// Labels eval_set with the current target, sends the plan as feedback,
// triggers a retrain, labels eval_set again and compares.
PoisonReport run_causative(Oracle& oracle, const PoisonPlan& plan, std::span<const Sample> eval_set,
                           QueryBudget& budget);

std::string sample_digest(std::string_view text);
nlohmann::json to_json(const PoisonPlan& plan);
nlohmann::json to_json(const PoisonReport& report);

} // namespace advml
