#include "advml/kernels.hpp"

#include <exception>
#include <mutex>

namespace advml {

namespace {

// Runs body(i) for i in [0, n) on the OpenMP team. The first exception thrown
// by any iteration is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<FeatureVector> featurize_samples_serial(std::span<const Sample> samples, const Vocabulary& vocab) {
    std::vector<FeatureVector> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(featurize(s.text, vocab));
    return out;
}

std::vector<FeatureVector> featurize_samples(std::span<const Sample> samples, const Vocabulary& vocab) {
    std::vector<FeatureVector> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { out[i] = featurize(samples[i].text, vocab); });
    return out;
}

std::vector<double> score_samples_serial(const TrainedNetwork& net, const Vocabulary& vocab,
                                         std::span<const Sample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(predict_score(net.params, net.normalizer, featurize(s.text, vocab)));
    return out;
}

std::vector<double> score_samples(const TrainedNetwork& net, const Vocabulary& vocab, std::span<const Sample> samples) {
    std::vector<double> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        out[i] = predict_score(net.params, net.normalizer, featurize(samples[i].text, vocab));
    });
    return out;
}

std::vector<Label> classify_samples_serial(const TargetModel& model, std::span<const Sample> samples) {
    std::vector<Label> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(model.classify(s.text));
    return out;
}

std::vector<Label> classify_samples(const TargetModel& model, std::span<const Sample> samples) {
    std::vector<Label> out(samples.size(), Label::one);
    parallel_for(samples.size(), [&](std::size_t i) { out[i] = model.classify(samples[i].text); });
    return out;
}

} // namespace advml
