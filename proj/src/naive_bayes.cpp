#include "advml/naive_bayes.hpp"

#include <cmath>

#include "advml/errors.hpp"

namespace advml {

NaiveBayes NaiveBayes::fit(const SampleSet& corpus) {
    std::array<double, 2> docs{};
    std::array<double, 2> tokens{};
    std::unordered_map<std::string, std::array<double, 2>> counts;
    for (const auto& s : corpus.samples) {
        if (!s.label) throw DataError("naive bayes: corpus has unlabeled samples");
        const std::size_t c = *s.label == Label::one ? 0 : 1;
        docs[c] += 1.0;
        for (auto& tok : tokenize(s.text)) {
            counts[std::move(tok)][c] += 1.0;
            tokens[c] += 1.0;
        }
    }
    if (docs[0] == 0.0 || docs[1] == 0.0) throw DataError("naive bayes: corpus must contain both classes");

    NaiveBayes nb;
    const double total_docs = docs[0] + docs[1];
    const double v = static_cast<double>(counts.size());
    for (std::size_t c = 0; c < 2; ++c) nb.log_prior_[c] = std::log(docs[c] / total_docs);
    nb.log_likelihood_.reserve(counts.size());
    for (const auto& [word, n] : counts) {
        std::array<double, 2> ll{};
        for (std::size_t c = 0; c < 2; ++c) ll[c] = std::log((n[c] + 1.0) / (tokens[c] + v));
        nb.log_likelihood_.emplace(word, ll);
    }
    return nb;
}

double NaiveBayes::log_odds(std::string_view text) const {
    double odds = log_prior_[1] - log_prior_[0];
    for (const auto& tok : tokenize(text)) {
        auto it = log_likelihood_.find(tok);
        if (it != log_likelihood_.end()) odds += it->second[1] - it->second[0];
    }
    return odds;
}

} // namespace advml
