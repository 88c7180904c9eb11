#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advml/corpus.hpp"
#include "advml/naive_bayes.hpp"
#include "advml/nnet.hpp"

namespace advml {

enum class TargetKind { naive_bayes, logistic, fnn };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view name);

// Bag-of-words logistic regression trained by seeded SGD.
struct LogisticModel {
    Vocabulary vocab;
    std::vector<double> weights;
    double bias = 0.0;

    static LogisticModel fit(const SampleSet& corpus, std::uint64_t seed);
    double logit(std::string_view text) const;

    bool operator==(const LogisticModel&) const = default;
};

struct FnnModel {
    Vocabulary vocab;
    TrainedNetwork net;

    static FnnModel fit(const SampleSet& corpus, std::uint64_t seed);
    double score(std::string_view text) const;

    bool operator==(const FnnModel&) const = default;
};

// The simulated target classifier. classify() is deterministic for a fitted
// model; internals are never exposed through the oracle.
class TargetModel {
public:
    // Throws DataError unless the corpus is labeled with both classes present.
    static TargetModel train(const SampleSet& corpus, TargetKind kind, std::uint64_t seed);

    TargetKind kind() const;
    Label classify(std::string_view text) const;

    bool operator==(const TargetModel&) const = default;

private:
    std::variant<NaiveBayes, LogisticModel, FnnModel> model_;
};

} // namespace advml
