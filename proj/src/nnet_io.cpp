#include <istream>
#include <ostream>
#include <sstream>

#include "advml/errors.hpp"
#include "advml/nnet.hpp"

namespace advml {

namespace {

constexpr std::string_view kMagic = "advml-network 1";

void write_reals(std::ostream& out, char tag, const std::vector<double>& values) {
    out << tag;
    for (double v : values) out << ' ' << v;
    out << '\n';
}

class LineReader {
public:
    LineReader(std::istream& in, std::size_t consumed) : in_(in), line_no_(consumed) {}

    std::istringstream next(std::string_view expected_tag) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(line_no_ + 1, "unexpected end of network file");
        ++line_no_;
        std::istringstream fields(line);
        std::string tag;
        fields >> tag;
        if (tag != expected_tag)
            throw ParseError(line_no_, "expected '" + std::string(expected_tag) + "', got '" + tag + "'");
        return fields;
    }

    std::vector<double> reals(std::string_view tag, std::size_t count) {
        auto fields = next(tag);
        std::vector<double> values(count);
        for (auto& v : values)
            if (!(fields >> v)) throw ParseError(line_no_, "too few values on '" + std::string(tag) + "' line");
        std::string extra;
        if (fields >> extra) throw ParseError(line_no_, "too many values on '" + std::string(tag) + "' line");
        return values;
    }

    std::size_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

TrainingConfig parse_config(std::istringstream& fields, std::size_t line) {
    TrainingConfig c;
    std::string kv;
    while (fields >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError(line, "bad config field '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        try {
            if (key == "hidden_layers") c.hidden_layers = std::stoull(value);
            else if (key == "neurons_per_layer") c.neurons_per_layer = std::stoull(value);
            else if (key == "loss") c.loss = parse_loss_kind(value);
            else if (key == "hidden_activation" || key == "output_activation") {
                if (value != "sigmoid" && value != "softmax") throw ParseError(line, "unsupported activation");
            } else if (key == "weight_init_scale") c.weight_init_scale = std::stod(value);
            else if (key == "minibatch_size") c.minibatch_size = std::stoull(value);
            else if (key == "momentum") c.momentum = std::stod(value);
            else if (key == "epochs") c.epochs = std::stoull(value);
            else if (key == "learning_rate") c.learning_rate = std::stod(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else throw ParseError(line, "unknown config key '" + key + "'");
        } catch (const std::logic_error&) {
            throw ParseError(line, "bad value for '" + key + "'");
        }
    }
    return c;
}

} // namespace

void write_network(const TrainedNetwork& net, std::ostream& out) {
    const auto old_precision = out.precision(17);
    out << kMagic << '\n';
    out << "config " << net.config.describe() << '\n';
    out << "layers " << net.params.layers.size() << '\n';
    for (const auto& layer : net.params.layers) {
        out << "layer " << layer.inputs << ' ' << layer.outputs << '\n';
        write_reals(out, 'w', layer.weights);
        write_reals(out, 'b', layer.bias);
    }
    out << "normalizer " << net.normalizer.scales.size() << '\n';
    write_reals(out, 's', net.normalizer.scales);
    out.precision(old_precision);
}

TrainedNetwork read_network(std::istream& in) {
    std::string magic;
    if (!std::getline(in, magic) || magic != kMagic) throw ParseError(1, "not an advml network file");
    LineReader reader(in, 1);
    TrainedNetwork net;
    {
        auto fields = reader.next("config");
        net.config = parse_config(fields, reader.line());
    }
    std::size_t depth = 0;
    if (!(reader.next("layers") >> depth) || depth == 0) throw ParseError(reader.line(), "bad layer count");
    for (std::size_t l = 0; l < depth; ++l) {
        Layer layer;
        auto shape = reader.next("layer");
        if (!(shape >> layer.inputs >> layer.outputs)) throw ParseError(reader.line(), "bad layer shape");
        layer.weights = reader.reals("w", layer.inputs * layer.outputs);
        layer.bias = reader.reals("b", layer.outputs);
        net.params.layers.push_back(std::move(layer));
    }
    std::size_t dim = 0;
    if (!(reader.next("normalizer") >> dim)) throw ParseError(reader.line(), "bad normalizer size");
    net.normalizer.scales = reader.reals("s", dim);
    if (!net.params.shapes_chain() || dim != net.params.input_dim())
        throw ParseError(reader.line(), "inconsistent layer shapes");
    return net;
}

} // namespace advml
