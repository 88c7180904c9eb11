#include "advml/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "advml/kernels.hpp"
#include "advml/rng.hpp"

namespace advml {

std::string to_string(EvasionObjective objective) {
    switch (objective) {
    case EvasionObjective::average_error: return "average_error";
    case EvasionObjective::force_1_to_2: return "force_1_to_2";
    case EvasionObjective::force_2_to_1: return "force_2_to_1";
    }
    return "unknown";
}

EvasionObjective parse_evasion_objective(std::string_view name) {
    if (name == "average_error") return EvasionObjective::average_error;
    if (name == "force_1_to_2") return EvasionObjective::force_1_to_2;
    if (name == "force_2_to_1") return EvasionObjective::force_2_to_1;
    throw InputError("unknown evasion objective '" + std::string(name) + "'");
}

std::vector<std::size_t> select_evasion_indices(std::span<const double> scores, double threshold, std::size_t n,
                                                EvasionObjective objective, bool& is_short) {
    if (n > scores.size()) throw InputError("select_evasion: n exceeds pool size");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool side_two = scores[i] >= threshold;
        if (objective == EvasionObjective::average_error ||
            (objective == EvasionObjective::force_1_to_2 && side_two) ||
            (objective == EvasionObjective::force_2_to_1 && !side_two))
            candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(scores[a] - threshold) < std::abs(scores[b] - threshold);
    });
    is_short = candidates.size() < n;
    candidates.resize(std::min(n, candidates.size()));
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

EvasionSelection select_evasion(const SubstituteClassifier& substitute, std::span<const Sample> pool, std::size_t n,
                                EvasionObjective objective) {
    EvasionSelection sel;
    sel.indices = select_evasion_indices(substitute.score_all(pool), substitute.threshold, n, objective, sel.is_short);
    for (auto i : sel.indices) sel.samples.push_back(pool[i]);
    return sel;
}

namespace {

double error_rate(std::span<const Label> predicted, std::span<const Sample> samples) {
    if (predicted.size() != samples.size()) throw InputError("evaluate_evasion: length mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].label) throw DataError("evaluate_evasion: sample lacks ground truth");
        wrong += predicted[i] != *samples[i].label;
    }
    return samples.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(samples.size());
}

} // namespace

EvasionOutcome evaluate_evasion(std::span<const Label> target_on_selected, std::span<const Sample> selected,
                                std::span<const Label> target_on_baseline, std::span<const Sample> baseline) {
    return EvasionOutcome{error_rate(target_on_selected, selected), error_rate(target_on_baseline, baseline),
                          selected.size(), baseline.size()};
}

EvasionOutcome evaluate_evasion(const TargetModel& target, std::span<const Sample> selected,
                                std::span<const Sample> baseline) {
    return evaluate_evasion(classify_samples(target, selected), selected, classify_samples(target, baseline),
                            baseline);
}

nlohmann::json to_json(const EvasionOutcome& o) {
    return nlohmann::json{{"selected_error_rate", o.selected_error_rate},
                          {"baseline_error_rate", o.baseline_error_rate},
                          {"selected_count", o.selected_count},
                          {"baseline_count", o.baseline_count}};
}

std::size_t poison_count_per_side(std::size_t pool_size, double p) {
    if (!(p >= 0.0 && p <= 100.0)) throw InputError("poison percentage must be in [0, 100]");
    return static_cast<std::size_t>(std::floor(static_cast<double>(pool_size) * p / 200.0));
}

PoisonPlan plan_poison(std::span<const Sample> pool, std::span<const double> scores, double threshold, double p) {
    if (pool.empty()) throw InputError("plan_poison: pool is empty");
    if (scores.size() != pool.size()) throw InputError("plan_poison: length mismatch");
    const std::size_t per_side = poison_count_per_side(pool.size(), p);

    std::vector<std::size_t> rank(pool.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    PoisonPlan plan;
    plan.p = p;
    auto add = [&](std::size_t i) {
        const Label original = SubstituteClassifier::decide(scores[i], threshold);
        plan.items.push_back(PoisonItem{pool[i].text, original, flip(original), scores[i]});
    };
    for (std::size_t k = 0; k < per_side; ++k) add(rank[k]);
    for (std::size_t k = 0; k < per_side; ++k) add(rank[rank.size() - 1 - k]);
    return plan;
}

PoisonPlan plan_poison(const SubstituteClassifier& substitute, std::span<const Sample> pool, double p) {
    if (pool.empty()) throw InputError("plan_poison: pool is empty");
    return plan_poison(pool, substitute.score_all(pool), substitute.threshold, p);
}

PoisonPlan plan_random_flip_baseline(const SubstituteClassifier& substitute, std::span<const Sample> pool,
                                     std::size_t count, std::uint64_t seed) {
    if (count > pool.size()) throw InputError("random flip: count exceeds pool size");
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "random_flip"));
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(count);
    std::sort(order.begin(), order.end());

    std::vector<Sample> chosen;
    for (auto i : order) chosen.push_back(pool[i]);
    const auto scores = substitute.score_all(chosen);

    PoisonPlan plan;
    plan.p = pool.empty() ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(pool.size());
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        const Label original = SubstituteClassifier::decide(scores[k], substitute.threshold);
        plan.items.push_back(PoisonItem{chosen[k].text, original, flip(original), scores[k]});
    }
    return plan;
}

PoisonReport run_causative(Oracle& oracle, const PoisonPlan& plan, std::span<const Sample> eval_set,
                           QueryBudget& budget) {
    PoisonReport report;
    report.plan_size = plan.items.size();
    report.p = plan.p;
    const std::size_t before = budget.consumed;

    auto before_attack = collect_labels(oracle, eval_set, budget);
    for (const auto& item : plan.items) oracle.submit_feedback(item.text, item.flipped);
    oracle.retrain();
    auto after_attack = collect_labels(oracle, eval_set, budget);

    report.divergence = divergence(labels_of(before_attack.labeled), labels_of(after_attack.labeled));
    report.calls_used = budget.consumed - before;
    report.days_elapsed = before_attack.days_elapsed + after_attack.days_elapsed;
    return report;
}

std::string sample_digest(std::string_view text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

nlohmann::json to_json(const PoisonPlan& plan) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : plan.items)
        items.push_back({{"sample", sample_digest(it.text)},
                         {"original_label", to_int(it.original)},
                         {"flipped_label", to_int(it.flipped)},
                         {"score", it.score}});
    return nlohmann::json{{"p", plan.p}, {"size", plan.items.size()}, {"items", std::move(items)}};
}

nlohmann::json to_json(const PoisonReport& r) {
    auto j = to_json(r.divergence);
    j["d"] = r.divergence.d_avg;
    j["plan_size"] = r.plan_size;
    j["p"] = r.p;
    j["calls_used"] = r.calls_used;
    j["days_elapsed"] = r.days_elapsed;
    return j;
}

} // namespace advml
