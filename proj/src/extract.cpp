#include "advml/extract.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "advml/kernels.hpp"
#include "advml/rng.hpp"

namespace advml {

CollectionResult collect_labels(Oracle& oracle, std::span<const Sample> samples, QueryBudget& budget) {
    CollectionResult result;
    result.labeled.provenance = Provenance::generated;
    result.labeled.samples.reserve(samples.size());
    for (const auto& sample : samples) {
        if (budget.remaining() == 0) throw BudgetError(std::move(result), samples.size());
        bool retried = false;
        for (;;) {
            try {
                const Label label = oracle.classify(sample.text);
                ++budget.consumed;
                result.labeled.samples.push_back(Sample{sample.text, label});
                break;
            } catch (const RateLimitedError&) {
                if (retried) throw;
                oracle.advance_day();
                ++result.days_elapsed;
                retried = true;
            }
        }
    }
    return result;
}

DivergenceReport divergence(std::span<const Label> reference, std::span<const Label> other) {
    if (reference.size() != other.size()) throw InputError("divergence: label vectors differ in length");
    DivergenceReport r;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (reference[i] == Label::one) {
            ++r.n1;
            if (other[i] != Label::one) ++r.m1;
        } else {
            ++r.n2;
            if (other[i] != Label::two) ++r.m2;
        }
    }
    if (r.n1 == 0 || r.n2 == 0) throw DataError("divergence: reference labels must contain both classes");
    r.d1 = static_cast<double>(r.m1) / static_cast<double>(r.n1);
    r.d2 = static_cast<double>(r.m2) / static_cast<double>(r.n2);
    r.d_max = std::max(r.d1, r.d2);
    r.d_avg = static_cast<double>(r.m1 + r.m2) / static_cast<double>(r.n1 + r.n2);
    return r;
}

nlohmann::json to_json(const DivergenceReport& r) {
    return nlohmann::json{{"n1", r.n1}, {"n2", r.n2}, {"m1", r.m1},       {"m2", r.m2},
                          {"d1", r.d1}, {"d2", r.d2}, {"d_max", r.d_max}, {"d_avg", r.d_avg}};
}

ThresholdResult optimize_threshold(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) throw InputError("optimize_threshold: length mismatch");
    std::size_t n1 = 0;
    for (Label l : labels) n1 += l == Label::one;
    const std::size_t n2 = labels.size() - n1;
    if (n1 == 0 || n2 == 0) throw DataError("optimize_threshold: labels must contain both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Threshold 0 labels everything 2: every class-1 sample is wrong.
    std::size_t m1 = n1, m2 = 0;
    auto d_max_of = [&] {
        return std::max(static_cast<double>(m1) / static_cast<double>(n1),
                        static_cast<double>(m2) / static_cast<double>(n2));
    };
    ThresholdResult best{0.0, d_max_of()};

    // Sweep distinct score groups upwards; after group k passes below the
    // threshold its members are labeled 1.
    std::size_t k = 0;
    while (k < order.size()) {
        const double value = scores[order[k]];
        std::size_t end = k;
        while (end < order.size() && scores[order[end]] == value) {
            if (labels[order[end]] == Label::one) --m1;
            else ++m2;
            ++end;
        }
        double candidate = 1.0;
        if (end < order.size()) {
            const double next = scores[order[end]];
            candidate = 0.5 * (value + next);
            if (!(candidate > value)) candidate = next; // adjacent doubles
        }
        // The final group sits below 1 only if its score is below 1.
        if (end == order.size() && !(value < 1.0)) break;
        const double d = d_max_of();
        if (d < best.d_max) best = {candidate, d};
        k = end;
    }
    return best;
}

double SubstituteClassifier::score(std::string_view text) const {
    return predict_score(network.params, network.normalizer, featurize(text, vocab));
}

std::vector<double> SubstituteClassifier::score_all(std::span<const Sample> samples) const {
    return score_samples(network, vocab, samples);
}

std::vector<Label> SubstituteClassifier::predict_all(std::span<const Sample> samples) const {
    const auto scores = score_all(samples);
    std::vector<Label> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(decide(s, threshold));
    return out;
}

void write_substitute(const SubstituteClassifier& substitute, std::ostream& out) {
    const auto old_precision = out.precision(17);
    out << "advml-substitute 1\n";
    out << "threshold " << substitute.threshold << '\n';
    out.precision(old_precision);
    write_network(substitute.network, out);
    out << "vocabulary " << substitute.vocab.size() << '\n';
    write_vocabulary(substitute.vocab, out);
}

SubstituteClassifier read_substitute(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "advml-substitute 1") throw ParseError(1, "not an advml substitute file");
    SubstituteClassifier s;
    std::string tag;
    if (!(in >> tag >> s.threshold) || tag != "threshold") throw ParseError(2, "expected threshold");
    std::getline(in, line);
    s.network = read_network(in);
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "vocabulary") throw ParseError(0, "expected vocabulary section");
    std::getline(in, line);
    s.vocab = read_vocabulary(in);
    if (s.vocab.size() != count || count != s.network.params.input_dim())
        throw ParseError(0, "vocabulary size does not match network input");
    return s;
}

std::vector<Label> labels_of(const SampleSet& labeled) {
    std::vector<Label> out;
    out.reserve(labeled.size());
    for (const auto& s : labeled.samples) {
        if (!s.label) throw DataError("sample set has unlabeled samples");
        out.push_back(*s.label);
    }
    return out;
}

FitResult fit_substitute(const SampleSet& labeled, const TrainingConfig& config, const Vocabulary& vocab,
                         std::uint64_t split_seed) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const auto& label = labeled.samples[i].label;
        if (!label) throw DataError("fit_substitute: sample set has unlabeled samples");
        by_class[*label == Label::one ? 0 : 1].push_back(i);
    }
    if (by_class[0].size() < 2 || by_class[1].size() < 2)
        throw DataError("fit_substitute: need at least two samples of each class");

    Rng rng(derive_seed(split_seed, "fit_substitute.split"));
    std::vector<std::size_t> train_idx, valid_idx;
    for (auto& members : by_class) {
        rng.shuffle(std::span<std::size_t>(members));
        const std::size_t half = (members.size() + 1) / 2;
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(half));
        valid_idx.insert(valid_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(half), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());

    std::vector<Sample> train_samples, valid_samples;
    for (auto i : train_idx) train_samples.push_back(labeled.samples[i]);
    for (auto i : valid_idx) valid_samples.push_back(labeled.samples[i]);

    const auto train_x = featurize_samples(train_samples, vocab);
    std::vector<LabeledFeatures> data;
    data.reserve(train_x.size());
    for (std::size_t k = 0; k < train_x.size(); ++k) data.push_back({train_x[k], *train_samples[k].label});

    FitResult result;
    result.substitute.vocab = vocab;
    result.substitute.network = train(data, config);

    const auto scores = result.substitute.score_all(valid_samples);
    std::vector<Label> valid_labels;
    for (const auto& s : valid_samples) valid_labels.push_back(*s.label);
    result.substitute.threshold = optimize_threshold(scores, valid_labels).threshold;

    std::vector<Label> predicted;
    for (double s : scores) predicted.push_back(SubstituteClassifier::decide(s, result.substitute.threshold));
    result.validation = divergence(valid_labels, predicted);
    return result;
}

DivergenceReport evaluate_substitute(const SubstituteClassifier& substitute, const SampleSet& labeled) {
    return divergence(labels_of(labeled), substitute.predict_all(labeled.samples));
}

std::string config_digest(const TrainingConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.describe())));
    return buf;
}

nlohmann::json to_json(const ExtractionReport& r) {
    auto j = to_json(r.divergence);
    j["budget_used"] = r.budget_used;
    j["days_elapsed"] = r.days_elapsed;
    j["config_digest"] = r.config_digest;
    j["seed"] = r.seed;
    return j;
}

} // namespace advml
