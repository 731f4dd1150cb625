#include "nnfl/model.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nnfl {

std::size_t Model::weight_count() const {
    std::size_t n = 0;
    for (const auto &l : layers)
        n += l.weights_q.size();
    return n;
}

std::size_t Model::bias_count() const {
    std::size_t n = 0;
    for (const auto &l : layers)
        n += l.bias_q.size();
    return n;
}

std::vector<std::size_t> Model::hidden_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].relu)
            out.push_back(i);
    return out;
}

void Model::validate() const {
    require(input_dim > 0, "model input_dim must be positive");
    require(!layers.empty(), "model has no layers");
    std::size_t expected_in = input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto &l = layers[i];
        const std::string where = "layer " + std::to_string(i) + ": ";
        require(l.out_dim > 0 && l.in_dim > 0, where + "dimensions must be positive");
        require(l.in_dim == expected_in, where + "in_dim does not match previous layer");
        require(l.weights_q.size() == l.out_dim * l.in_dim, where + "weight count mismatch");
        require(l.bias_q.size() == l.out_dim, where + "bias count mismatch");
        require(l.w_scale > 0.0 && std::isfinite(l.w_scale), where + "w_scale must be positive");
        require(l.b_scale > 0.0 && std::isfinite(l.b_scale), where + "b_scale must be positive");
        const bool last = i + 1 == layers.size();
        require(l.relu != last, where + (last ? "logit layer must not have ReLU" : "hidden layer needs ReLU"));
        expected_in = l.out_dim;
    }
    require(num_classes() >= 2, "model needs at least two classes");
}

std::vector<double> dequantize_pixels(std::span<const std::uint8_t> pixels) {
    std::vector<double> x(pixels.size());
    std::transform(pixels.begin(), pixels.end(), x.begin(), pixel_value);
    return x;
}

FetchedParams DirectReader::fetch(const Model &model, const InputImage &input) {
    FetchedParams p;
    p.weights.reserve(model.layers.size());
    p.biases.reserve(model.layers.size());
    for (const auto &l : model.layers) {
        p.weights.push_back(l.weights_q);
        p.biases.push_back(l.bias_q);
    }
    p.pixels = input.pixels;
    return p;
}

std::vector<double> evaluate_fetched(const Model &model, const FetchedParams &params,
                                     std::span<const ActivationFault> activation_faults) {
    require(params.pixels.size() == model.input_dim, "input dimension does not match model");
    return shadow_forward(to_shadow(model, params), dequantize_pixels(params.pixels), activation_faults);
}

Tensor forward(const Model &model, const InputImage &input, MemoryReader &reader,
               std::span<const ActivationFault> activation_faults) {
    require(input.pixels.size() == model.input_dim, "input dimension does not match model");
    return Tensor::vector(evaluate_fetched(model, reader.fetch(model, input), activation_faults));
}

std::size_t predict(const Model &model, const InputImage &input, MemoryReader &reader,
                    std::span<const ActivationFault> activation_faults) {
    const Tensor logits = forward(model, input, reader, activation_faults);
    return argmax(logits.data());
}

std::size_t predict(const Model &model, const InputImage &input) {
    DirectReader reader;
    return predict(model, input, reader);
}

std::vector<double> softmax(std::span<const double> logits) {
    require(!logits.empty(), "softmax of empty vector");
    for (double z : logits)
        require(std::isfinite(z), "softmax input must be finite");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double &v : p)
        v /= sum;
    return p;
}

Tensor softmax(const Tensor &logits) { return Tensor(logits.shape(), softmax(logits.data())); }

double cross_entropy(std::span<const double> logits, std::size_t label) {
    require(label < logits.size(), "label out of range");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits)
        sum += std::exp(z - m);
    return std::max(0.0, m + std::log(sum) - logits[label]);
}

} // namespace nnfl
