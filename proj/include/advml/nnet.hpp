#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "advml/corpus.hpp"

namespace advml {

enum class LossKind { cross_entropy, squared_error };
enum class HiddenActivation { sigmoid };
enum class OutputActivation { softmax };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct TrainingConfig {
    std::size_t hidden_layers = 2;
    std::size_t neurons_per_layer = 60;
    LossKind loss = LossKind::cross_entropy;
    HiddenActivation hidden_activation = HiddenActivation::sigmoid;
    OutputActivation output_activation = OutputActivation::softmax;
    double weight_init_scale = 1.0;
    std::size_t minibatch_size = 5;
    double momentum = 0.9;
    std::size_t epochs = 8;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;

    // Throws InputError unless every count is >= 1 (epochs may be 0),
    // momentum is in [0, 1) and the scale and learning rate are positive.
    void validate() const;

    // Canonical single-line "key=value ..." form; also the digest input.
    std::string describe() const;

    bool operator==(const TrainingConfig&) const = default;
};

// 2 x 60 sigmoid, cross entropy, unscaled init, minibatch 5, momentum 0.9, 8 epochs.
TrainingConfig full_data_profile();
// 2 x 10 sigmoid, squared error, init scaled by 0.5, minibatch 25, momentum 0.9, 10 epochs.
TrainingConfig limited_data_profile();

// Dense layer, weights row-major [outputs x inputs].
struct Layer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    Layer() = default;
    Layer(std::size_t in, std::size_t out) : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

    double& w(std::size_t j, std::size_t i) { return weights[j * inputs + i]; }
    double w(std::size_t j, std::size_t i) const { return weights[j * inputs + i]; }

    bool operator==(const Layer&) const = default;
};

struct NetworkParams {
    std::vector<Layer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().inputs; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().outputs; }
    bool shapes_chain() const;
    bool all_finite() const;

    bool operator==(const NetworkParams&) const = default;
};

// Same shape as the network it was computed for.
struct Gradients {
    std::vector<Layer> layers;

    double max_abs() const;
    double norm() const;
};

// Per-feature divisors, fitted once on the training set and then frozen.
struct Normalizer {
    std::vector<double> scales;

    static Normalizer identity(std::size_t dim) { return Normalizer{std::vector<double>(dim, 1.0)}; }

    bool operator==(const Normalizer&) const = default;
};

struct LabeledFeatures {
    FeatureVector x;
    Label y;
};

// Scale for feature i is max |x_i| over the dataset, floored at 1.
Normalizer fit_normalizer(std::span<const LabeledFeatures> data, std::size_t dim);

// Outputs of every layer after activation; the last entry is the class
// probability 2-vector.
struct Activations {
    std::vector<std::vector<double>> layers;

    const std::vector<double>& output() const { return layers.back(); }
};

NetworkParams init_network(const TrainingConfig& config, std::size_t input_dim);

std::vector<double> softmax(std::span<const double> logits);

// Throws NumericError on a non-finite pre-activation.
Activations forward(const NetworkParams& params, const FeatureVector& x, const Normalizer& norm);

// Probabilities under cross entropy are clamped at this floor.
inline constexpr double kProbabilityFloor = 1e-12;

double loss(std::span<const double> output, Label label, LossKind kind);

// Mean gradient of the configured loss over the batch.
Gradients gradients(const NetworkParams& params, std::span<const LabeledFeatures> batch, const TrainingConfig& config,
                    const Normalizer& norm);

double mean_loss(const NetworkParams& params, const Normalizer& norm, std::span<const LabeledFeatures> data,
                 LossKind kind);

// Sample visiting order for one epoch of minibatch SGD.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct TrainedNetwork {
    NetworkParams params;
    Normalizer normalizer;
    TrainingConfig config;

    bool operator==(const TrainedNetwork&) const = default;
};

// Fits the normalizer, then runs config.epochs passes of minibatch SGD with
// momentum (v <- momentum * v - lr * g; w <- w + v). Throws DataError when
// the dataset is empty or holds a single class.
TrainedNetwork train(std::span<const LabeledFeatures> data, const TrainingConfig& config);

// Softmax probability of class 2; low scores lean towards class 1.
double predict_score(const NetworkParams& params, const Normalizer& norm, const FeatureVector& x);

// Text form: layer shapes, weights, biases, normalizer scales and config, all
// reals at 17 significant digits so a round trip is exact.
void write_network(const TrainedNetwork& net, std::ostream& out);
TrainedNetwork read_network(std::istream& in);

} // namespace advml
