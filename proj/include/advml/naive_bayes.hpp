#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>

#include "advml/corpus.hpp"

namespace advml {

// Multinomial Naive Bayes over corpus tokens with add-one smoothing. Tokens
// never seen in training are ignored at prediction time.
class NaiveBayes {
public:
    // Throws DataError unless the corpus is fully labeled with both classes.
    static NaiveBayes fit(const SampleSet& corpus);

    // log P(2 | text) - log P(1 | text).
    double log_odds(std::string_view text) const;
    Label classify(std::string_view text) const { return log_odds(text) > 0.0 ? Label::two : Label::one; }

    std::size_t vocabulary_size() const { return log_likelihood_.size(); }

    bool operator==(const NaiveBayes&) const = default;

private:
    std::array<double, 2> log_prior_{};
    std::unordered_map<std::string, std::array<double, 2>> log_likelihood_;
};

} // namespace advml
