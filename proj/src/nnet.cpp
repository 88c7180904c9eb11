#include "advml/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "advml/errors.hpp"
#include "advml/rng.hpp"

namespace advml {

std::string to_string(LossKind kind) {
    return kind == LossKind::cross_entropy ? "cross_entropy" : "squared_error";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "cross_entropy") return LossKind::cross_entropy;
    if (name == "squared_error") return LossKind::squared_error;
    throw InputError("unknown loss kind '" + std::string(name) + "'");
}

void TrainingConfig::validate() const {
    if (hidden_layers < 1) throw InputError("hidden_layers must be >= 1");
    if (neurons_per_layer < 1) throw InputError("neurons_per_layer must be >= 1");
    if (minibatch_size < 1) throw InputError("minibatch_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must be in [0, 1)");
    if (!(weight_init_scale > 0.0) || !std::isfinite(weight_init_scale))
        throw InputError("weight_init_scale must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be positive");
}

std::string TrainingConfig::describe() const {
    std::ostringstream out;
    out.precision(17);
    out << "hidden_layers=" << hidden_layers << " neurons_per_layer=" << neurons_per_layer
        << " loss=" << to_string(loss) << " hidden_activation=sigmoid output_activation=softmax"
        << " weight_init_scale=" << weight_init_scale << " minibatch_size=" << minibatch_size
        << " momentum=" << momentum << " epochs=" << epochs << " learning_rate=" << learning_rate
        << " seed=" << seed;
    return out.str();
}

TrainingConfig full_data_profile() {
    TrainingConfig c;
    c.hidden_layers = 2;
    c.neurons_per_layer = 60;
    c.loss = LossKind::cross_entropy;
    c.weight_init_scale = 1.0;
    c.minibatch_size = 5;
    c.momentum = 0.9;
    c.epochs = 8;
    return c;
}

TrainingConfig limited_data_profile() {
    TrainingConfig c;
    c.hidden_layers = 2;
    c.neurons_per_layer = 10;
    c.loss = LossKind::squared_error;
    c.weight_init_scale = 0.5;
    c.minibatch_size = 25;
    c.momentum = 0.9;
    c.epochs = 10;
    return c;
}

bool NetworkParams::shapes_chain() const {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs) return false;
        if (l > 0 && layers[l - 1].outputs != layer.inputs) return false;
    }
    return !layers.empty();
}

bool NetworkParams::all_finite() const {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(layers.begin(), layers.end(), [&](const Layer& l) {
        return std::all_of(l.weights.begin(), l.weights.end(), finite) &&
               std::all_of(l.bias.begin(), l.bias.end(), finite);
    });
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& l : layers) {
        for (double v : l.weights) m = std::max(m, std::abs(v));
        for (double v : l.bias) m = std::max(m, std::abs(v));
    }
    return m;
}

double Gradients::norm() const {
    double s = 0.0;
    for (const auto& l : layers) {
        for (double v : l.weights) s += v * v;
        for (double v : l.bias) s += v * v;
    }
    return std::sqrt(s);
}

Normalizer fit_normalizer(std::span<const LabeledFeatures> data, std::size_t dim) {
    Normalizer norm = Normalizer::identity(dim);
    for (const auto& item : data)
        for (auto [i, c] : item.x.nonzeros) norm.scales[i] = std::max(norm.scales[i], static_cast<double>(c));
    return norm;
}

NetworkParams init_network(const TrainingConfig& config, std::size_t input_dim) {
    config.validate();
    if (input_dim < 1) throw InputError("init_network: input_dim must be >= 1");
    Rng rng(derive_seed(config.seed, "init_network"));

    std::vector<std::size_t> sizes{input_dim};
    for (std::size_t h = 0; h < config.hidden_layers; ++h) sizes.push_back(config.neurons_per_layer);
    sizes.push_back(2);

    NetworkParams params;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer(sizes[l], sizes[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        for (auto& w : layer.weights) w = rng.uniform(-limit, limit) * config.weight_init_scale;
        for (auto& b : layer.bias) b = rng.uniform(-limit, limit) * config.weight_init_scale;
        params.layers.push_back(std::move(layer));
    }
    return params;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - top);
        sum += out[k];
    }
    for (auto& v : out) v /= sum;
    return out;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_finite(std::span<const double> z) {
    for (double v : z)
        if (!std::isfinite(v)) throw NumericError("non-finite pre-activation in forward pass");
}

} // namespace

Activations forward(const NetworkParams& params, const FeatureVector& x, const Normalizer& norm) {
    if (x.dim != params.input_dim()) throw InputError("forward: feature dimension does not match network input");
    Activations acts;
    acts.layers.reserve(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const Layer& layer = params.layers[l];
        std::vector<double> z(layer.bias);
        if (l == 0) {
            for (auto [i, c] : x.nonzeros) {
                const double xi = static_cast<double>(c) / norm.scales[i];
                for (std::size_t j = 0; j < layer.outputs; ++j) z[j] += layer.w(j, i) * xi;
            }
        } else {
            const auto& in = acts.layers.back();
            for (std::size_t j = 0; j < layer.outputs; ++j) {
                const double* row = &layer.weights[j * layer.inputs];
                double s = 0.0;
                for (std::size_t i = 0; i < layer.inputs; ++i) s += row[i] * in[i];
                z[j] += s;
            }
        }
        check_finite(z);
        if (l + 1 == params.layers.size()) {
            acts.layers.push_back(softmax(z));
        } else {
            for (auto& v : z) v = sigmoid(v);
            acts.layers.push_back(std::move(z));
        }
    }
    return acts;
}

double loss(std::span<const double> output, Label label, LossKind kind) {
    const std::size_t target = label == Label::one ? 0 : 1;
    if (kind == LossKind::cross_entropy) return -std::log(std::max(output[target], kProbabilityFloor));
    double s = 0.0;
    for (std::size_t k = 0; k < output.size(); ++k) {
        const double d = output[k] - (k == target ? 1.0 : 0.0);
        s += d * d;
    }
    return s;
}

Gradients gradients(const NetworkParams& params, std::span<const LabeledFeatures> batch, const TrainingConfig& config,
                    const Normalizer& norm) {
    if (batch.empty()) throw InputError("gradients: batch is empty");
    Gradients grad;
    for (const auto& layer : params.layers) grad.layers.emplace_back(layer.inputs, layer.outputs);

    const std::size_t depth = params.layers.size();
    for (const auto& item : batch) {
        const Activations acts = forward(params, item.x, norm);
        const auto& p = acts.output();
        const std::size_t target = item.y == Label::one ? 0 : 1;

        // dL/dz at the softmax layer.
        std::vector<double> delta(p.size(), 0.0);
        if (config.loss == LossKind::cross_entropy) {
            if (p[target] > kProbabilityFloor)
                for (std::size_t k = 0; k < p.size(); ++k) delta[k] = p[k] - (k == target ? 1.0 : 0.0);
        } else {
            double inner = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) inner += (p[k] - (k == target ? 1.0 : 0.0)) * p[k];
            for (std::size_t m = 0; m < p.size(); ++m)
                delta[m] = 2.0 * p[m] * ((p[m] - (m == target ? 1.0 : 0.0)) - inner);
        }

        for (std::size_t l = depth; l-- > 0;) {
            const Layer& layer = params.layers[l];
            Layer& g = grad.layers[l];
            for (std::size_t j = 0; j < layer.outputs; ++j) g.bias[j] += delta[j];
            if (l == 0) {
                for (auto [i, c] : item.x.nonzeros) {
                    const double xi = static_cast<double>(c) / norm.scales[i];
                    for (std::size_t j = 0; j < layer.outputs; ++j) g.w(j, i) += delta[j] * xi;
                }
                break;
            }
            const auto& in = acts.layers[l - 1];
            std::vector<double> prev(layer.inputs, 0.0);
            for (std::size_t j = 0; j < layer.outputs; ++j) {
                double* grow = &g.weights[j * layer.inputs];
                const double* wrow = &layer.weights[j * layer.inputs];
                for (std::size_t i = 0; i < layer.inputs; ++i) {
                    grow[i] += delta[j] * in[i];
                    prev[i] += wrow[i] * delta[j];
                }
            }
            for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] *= in[i] * (1.0 - in[i]);
            delta = std::move(prev);
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad.layers) {
        for (auto& v : g.weights) v *= inv;
        for (auto& v : g.bias) v *= inv;
    }
    return grad;
}

double mean_loss(const NetworkParams& params, const Normalizer& norm, std::span<const LabeledFeatures> data,
                 LossKind kind) {
    if (data.empty()) return 0.0;
    double s = 0.0;
    for (const auto& item : data) s += loss(forward(params, item.x, norm).output(), item.y, kind);
    return s / static_cast<double>(data.size());
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "epoch_order", epoch));
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

TrainedNetwork train(std::span<const LabeledFeatures> data, const TrainingConfig& config) {
    config.validate();
    if (data.empty()) throw DataError("train: dataset is empty");
    const bool has_one = std::any_of(data.begin(), data.end(), [](const auto& d) { return d.y == Label::one; });
    const bool has_two = std::any_of(data.begin(), data.end(), [](const auto& d) { return d.y == Label::two; });
    if (!has_one || !has_two) throw DataError("train: dataset must contain both classes");

    const std::size_t dim = data.front().x.dim;
    for (const auto& d : data)
        if (d.x.dim != dim) throw InputError("train: inconsistent feature dimensions");

    TrainedNetwork net{init_network(config, dim), fit_normalizer(data, dim), config};
    std::vector<Layer> velocity;
    for (const auto& layer : net.params.layers) velocity.emplace_back(layer.inputs, layer.outputs);

    std::vector<LabeledFeatures> batch;
    batch.reserve(config.minibatch_size);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = epoch_order(data.size(), config.seed, epoch);
        for (std::size_t start = 0; start < order.size(); start += config.minibatch_size) {
            batch.clear();
            const std::size_t stop = std::min(order.size(), start + config.minibatch_size);
            for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);
            const Gradients g = gradients(net.params, batch, config, net.normalizer);
            for (std::size_t l = 0; l < velocity.size(); ++l) {
                Layer& v = velocity[l];
                Layer& w = net.params.layers[l];
                const Layer& gl = g.layers[l];
                for (std::size_t k = 0; k < v.weights.size(); ++k) {
                    v.weights[k] = config.momentum * v.weights[k] - config.learning_rate * gl.weights[k];
                    w.weights[k] += v.weights[k];
                }
                for (std::size_t k = 0; k < v.bias.size(); ++k) {
                    v.bias[k] = config.momentum * v.bias[k] - config.learning_rate * gl.bias[k];
                    w.bias[k] += v.bias[k];
                }
            }
        }
    }
    if (!net.params.all_finite()) throw NumericError("train: parameters diverged");
    return net;
}

double predict_score(const NetworkParams& params, const Normalizer& norm, const FeatureVector& x) {
    return forward(params, x, norm).output()[1];
}

} // namespace advml
