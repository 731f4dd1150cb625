#include "nnfl/train.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/quant.hpp"
#include "nnfl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnfl {

namespace {

ShadowModel init_network(std::size_t input_dim, const Architecture &arch, Rng &rng) {
    ShadowModel m;
    m.input_dim = input_dim;
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
    dims.push_back(arch.num_classes);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        ShadowLayer l;
        l.in_dim = dims[i];
        l.out_dim = dims[i + 1];
        l.relu = i + 2 < dims.size();
        const double stddev = std::sqrt(2.0 / static_cast<double>(l.in_dim)); // He init
        l.weights.resize(l.in_dim * l.out_dim);
        for (double &w : l.weights)
            w = stddev * normal01(rng);
        l.biases.assign(l.out_dim, 0.0);
        m.layers.push_back(std::move(l));
    }
    return m;
}

} // namespace

Model quantize_model(const ShadowModel &real, const Dataset &calibration) {
    // Max post-ReLU activation per hidden layer sets the next layer's input scale.
    std::vector<double> max_act(real.layers.size(), 0.0);
    for (const auto &s : calibration.samples) {
        const auto trace = shadow_trace(real, dequantize_pixels(s.pixels));
        for (std::size_t li = 0; li < real.layers.size(); ++li)
            for (double a : trace.activations[li + 1])
                max_act[li] = std::max(max_act[li], a);
    }

    Model m;
    m.input_dim = real.input_dim;
    double input_scale = 1.0 / 255.0;
    for (std::size_t li = 0; li < real.layers.size(); ++li) {
        const auto &rl = real.layers[li];
        const auto qw = quantize(rl.weights);
        DenseLayer l;
        l.out_dim = rl.out_dim;
        l.in_dim = rl.in_dim;
        l.relu = rl.relu;
        l.weights_q = qw.q;
        l.w_scale = qw.scale;
        l.b_scale = qw.scale * input_scale;
        l.bias_q.resize(rl.biases.size());
        for (std::size_t o = 0; o < rl.biases.size(); ++o)
            l.bias_q[o] = quantize_bias(rl.biases[o], l.b_scale);
        m.layers.push_back(std::move(l));
        input_scale = max_act[li] > 0.0 ? max_act[li] / QuantScheme::qmax : 1.0;
    }
    m.validate();
    return m;
}

TrainResult train_sgd(const Dataset &train, const Architecture &arch, const TrainConfig &config,
                      const Dataset *test) {
    if (train.empty())
        throw ContractViolation("training dataset is empty");
    require(config.epochs >= 1 && config.batch_size >= 1, "epochs and batch_size must be >= 1");
    require(config.learning_rate > 0.0, "learning rate must be positive");
    require(arch.num_classes >= 2, "need at least two classes");
    for (const auto &s : train.samples) {
        require(s.pixels.size() == train.dim, "sample dimension mismatch");
        require(s.label >= 0 && static_cast<std::size_t>(s.label) < arch.num_classes, "label out of range");
    }

    Rng rng(config.seed);
    ShadowModel net = init_network(train.dim, arch, rng);

    std::vector<std::vector<double>> inputs;
    inputs.reserve(train.size());
    for (const auto &s : train.samples)
        inputs.push_back(dequantize_pixels(s.pixels));

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle<std::size_t>(order, rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double step = config.learning_rate / static_cast<double>(end - start);
            std::vector<std::vector<double>> gw(net.layers.size()), gb(net.layers.size());
            for (std::size_t li = 0; li < net.layers.size(); ++li) {
                gw[li].assign(net.layers[li].weights.size(), 0.0);
                gb[li].assign(net.layers[li].biases.size(), 0.0);
            }
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t idx = order[b];
                const auto g = backward(net, inputs[idx], static_cast<std::size_t>(train.samples[idx].label));
                for (std::size_t li = 0; li < net.layers.size(); ++li) {
                    for (std::size_t k = 0; k < gw[li].size(); ++k)
                        gw[li][k] += g.weights[li][k];
                    for (std::size_t k = 0; k < gb[li].size(); ++k)
                        gb[li][k] += g.biases[li][k];
                }
            }
            for (std::size_t li = 0; li < net.layers.size(); ++li) {
                auto &l = net.layers[li];
                for (std::size_t k = 0; k < l.weights.size(); ++k)
                    l.weights[k] -= step * gw[li][k];
                for (std::size_t k = 0; k < l.biases.size(); ++k)
                    l.biases[k] -= step * gb[li][k];
            }
        }
    }

    TrainResult r;
    r.model = quantize_model(net, train);
    r.train_accuracy = accuracy(r.model, train);
    if (test != nullptr)
        r.test_accuracy = accuracy(r.model, *test);
    return r;
}

} // namespace nnfl
