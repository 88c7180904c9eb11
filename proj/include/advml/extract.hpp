#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "advml/corpus.hpp"
#include "advml/errors.hpp"
#include "advml/nnet.hpp"
#include "advml/oracle.hpp"

namespace advml {

// Oracle calls the adversary is allowed to spend. Every consumed unit is one
// accepted classify call.
struct QueryBudget {
    std::size_t total = 0;
    std::size_t consumed = 0;

    std::size_t remaining() const { return total - consumed; }
};

struct CollectionResult {
    SampleSet labeled;
    std::size_t days_elapsed = 0;
};

// Thrown by collect_labels before the first call that would overrun the
// budget. Carries the samples labeled up to that point.
class BudgetError : public Error {
public:
    BudgetError(CollectionResult partial, std::size_t requested)
        : Error("query budget exhausted: " + std::to_string(partial.labeled.size()) + " of " +
                std::to_string(requested) + " samples labeled"),
          partial_(std::move(partial)) {}

    const CollectionResult& partial() const { return partial_; }

private:
    CollectionResult partial_;
};

// Labels every sample with one oracle call, advancing the simulated day and
// retrying whenever the oracle reports the daily quota as spent.
CollectionResult collect_labels(Oracle& oracle, std::span<const Sample> samples, QueryBudget& budget);

// Disagreement between a reference labelling (the target) and another.
// m1 counts reference-1 samples labeled 2, m2 reference-2 samples labeled 1.
struct DivergenceReport {
    std::size_t n1 = 0, n2 = 0, m1 = 0, m2 = 0;
    double d1 = 0.0, d2 = 0.0, d_max = 0.0, d_avg = 0.0;

    bool operator==(const DivergenceReport&) const = default;
};

// Throws DataError when the reference holds a single class, InputError on a
// length mismatch.
DivergenceReport divergence(std::span<const Label> reference, std::span<const Label> other);

nlohmann::json to_json(const DivergenceReport& report);

struct ThresholdResult {
    double threshold = 0.0;
    double d_max = 0.0;
};

// Scans 0, 1 and every midpoint between adjacent distinct sorted scores;
// samples with score < threshold are labeled 1. Returns the candidate with
// the smallest d_max, preferring the smallest threshold on ties.
ThresholdResult optimize_threshold(std::span<const double> scores, std::span<const Label> labels);

// The inferred classifier: predict(s) = 1 iff score(s) < threshold.
struct SubstituteClassifier {
    TrainedNetwork network;
    double threshold = 0.5;
    Vocabulary vocab;

    static Label decide(double score, double threshold) { return score < threshold ? Label::one : Label::two; }

    double score(std::string_view text) const;
    Label predict(std::string_view text) const { return decide(score(text), threshold); }
    std::vector<double> score_all(std::span<const Sample> samples) const;
    std::vector<Label> predict_all(std::span<const Sample> samples) const;

    bool operator==(const SubstituteClassifier&) const = default;
};

void write_substitute(const SubstituteClassifier& substitute, std::ostream& out);
SubstituteClassifier read_substitute(std::istream& in);

struct FitResult {
    SubstituteClassifier substitute;
    DivergenceReport validation;
};

// Stratified 50/50 split by split_seed: trains on one half, picks the
// threshold on the other and reports divergence there.
FitResult fit_substitute(const SampleSet& labeled, const TrainingConfig& config, const Vocabulary& vocab,
                         std::uint64_t split_seed);

// Divergence of the substitute from the labels carried by `labeled`.
DivergenceReport evaluate_substitute(const SubstituteClassifier& substitute, const SampleSet& labeled);

std::vector<Label> labels_of(const SampleSet& labeled);

std::string config_digest(const TrainingConfig& config);

struct ExtractionReport {
    DivergenceReport divergence;
    std::size_t budget_used = 0;
    std::size_t days_elapsed = 0;
    std::string config_digest;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const ExtractionReport& report);

} // namespace advml
