#pragma once

#include <span>
#include <vector>

#include "advml/corpus.hpp"
#include "advml/nnet.hpp"
#include "advml/target.hpp"

namespace advml {

// Batch kernels. Each *_serial function is the reference the OpenMP version
// is tested against; outputs are element-wise identical regardless of the
// thread count since every element is computed independently.

std::vector<FeatureVector> featurize_samples_serial(std::span<const Sample> samples, const Vocabulary& vocab);
std::vector<FeatureVector> featurize_samples(std::span<const Sample> samples, const Vocabulary& vocab);

// Class-2 probability for every sample.
std::vector<double> score_samples_serial(const TrainedNetwork& net, const Vocabulary& vocab,
                                         std::span<const Sample> samples);
std::vector<double> score_samples(const TrainedNetwork& net, const Vocabulary& vocab, std::span<const Sample> samples);

std::vector<Label> classify_samples_serial(const TargetModel& model, std::span<const Sample> samples);
std::vector<Label> classify_samples(const TargetModel& model, std::span<const Sample> samples);

} // namespace advml
