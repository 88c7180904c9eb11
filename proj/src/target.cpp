#include "advml/target.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advml/errors.hpp"
#include "advml/rng.hpp"

namespace advml {

namespace {

void require_two_classes(const SampleSet& corpus) {
    bool one = false, two = false;
    for (const auto& s : corpus.samples) {
        if (!s.label) throw DataError("target: corpus has unlabeled samples");
        (*s.label == Label::one ? one : two) = true;
    }
    if (!one || !two) throw DataError("target: corpus must contain both classes");
}

constexpr std::size_t kTargetVocabulary = 5000;

} // namespace

std::string to_string(TargetKind kind) {
    switch (kind) {
    case TargetKind::naive_bayes: return "naive_bayes";
    case TargetKind::logistic: return "logistic";
    case TargetKind::fnn: return "fnn";
    }
    return "unknown";
}

TargetKind parse_target_kind(std::string_view name) {
    if (name == "naive_bayes") return TargetKind::naive_bayes;
    if (name == "logistic") return TargetKind::logistic;
    if (name == "fnn") return TargetKind::fnn;
    throw InputError("unknown target kind '" + std::string(name) + "'");
}

LogisticModel LogisticModel::fit(const SampleSet& corpus, std::uint64_t seed) {
    LogisticModel m;
    m.vocab = build_vocabulary(corpus, kTargetVocabulary);
    m.weights.assign(m.vocab.size(), 0.0);

    std::vector<FeatureVector> xs;
    std::vector<double> ys;
    for (const auto& s : corpus.samples) {
        xs.push_back(featurize(s.text, m.vocab));
        ys.push_back(*s.label == Label::two ? 1.0 : 0.0);
    }
    constexpr std::size_t kEpochs = 10;
    constexpr double kRate = 0.05;
    constexpr double kL2 = 1e-4;
    for (std::size_t epoch = 0; epoch < kEpochs; ++epoch) {
        for (std::size_t k : epoch_order(xs.size(), derive_seed(seed, "logistic"), epoch)) {
            double z = m.bias;
            for (auto [i, c] : xs[k].nonzeros) z += m.weights[i] * c;
            const double err = 1.0 / (1.0 + std::exp(-z)) - ys[k];
            for (auto [i, c] : xs[k].nonzeros) m.weights[i] -= kRate * (err * c + kL2 * m.weights[i]);
            m.bias -= kRate * err;
        }
    }
    return m;
}

double LogisticModel::logit(std::string_view text) const {
    double z = bias;
    for (auto [i, c] : featurize(text, vocab).nonzeros) z += weights[i] * c;
    return z;
}

FnnModel FnnModel::fit(const SampleSet& corpus, std::uint64_t seed) {
    FnnModel m;
    m.vocab = build_vocabulary(corpus, 2000);
    std::vector<LabeledFeatures> data;
    for (const auto& s : corpus.samples) data.push_back({featurize(s.text, m.vocab), *s.label});
    TrainingConfig config = full_data_profile();
    config.seed = derive_seed(seed, "fnn_target");
    m.net = train(data, config);
    return m;
}

double FnnModel::score(std::string_view text) const {
    return predict_score(net.params, net.normalizer, featurize(text, vocab));
}

TargetModel TargetModel::train(const SampleSet& corpus, TargetKind kind, std::uint64_t seed) {
    require_two_classes(corpus);
    TargetModel t;
    switch (kind) {
    case TargetKind::naive_bayes: t.model_ = NaiveBayes::fit(corpus); break;
    case TargetKind::logistic: t.model_ = LogisticModel::fit(corpus, seed); break;
    case TargetKind::fnn: t.model_ = FnnModel::fit(corpus, seed); break;
    }
    return t;
}

TargetKind TargetModel::kind() const {
    return static_cast<TargetKind>(model_.index());
}

Label TargetModel::classify(std::string_view text) const {
    return std::visit(
        [&](const auto& m) -> Label {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, NaiveBayes>) return m.classify(text);
            else if constexpr (std::is_same_v<M, LogisticModel>) return m.logit(text) > 0.0 ? Label::two : Label::one;
            else return m.score(text) >= 0.5 ? Label::two : Label::one;
        },
        model_);
}

} // namespace advml
