#include "nnfl/shadow.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/quant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnfl {

namespace {

ShadowLayer dequantize_layer(const DenseLayer &l, std::span<const std::int8_t> w, std::span<const std::int32_t> b) {
    require(w.size() == l.out_dim * l.in_dim, "fetched weight count mismatch");
    require(b.size() == l.out_dim, "fetched bias count mismatch");
    ShadowLayer s;
    s.out_dim = l.out_dim;
    s.in_dim = l.in_dim;
    s.relu = l.relu;
    s.weights.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        s.weights[i] = l.w_scale * static_cast<double>(w[i]);
    s.biases.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        s.biases[i] = l.b_scale * static_cast<double>(b[i]);
    return s;
}

void apply_activation_faults(std::size_t layer, std::vector<double> &act, std::span<const ActivationFault> faults) {
    for (const auto &f : faults) {
        if (f.layer != layer)
            continue;
        require(f.neuron < act.size(), "activation fault neuron out of range");
        if (!f.code) {
            act[f.neuron] = 0.0;
            continue;
        }
        require(f.code->bit < 8, "activation code bit must be in [0,7]");
        require(f.code->code_scale > 0.0, "activation code scale must be positive");
        const auto code = static_cast<std::uint8_t>(
            std::clamp<std::int64_t>(round_half_away(act[f.neuron] / f.code->code_scale), 0, 255));
        const std::uint8_t faulted = apply_fault<std::uint8_t>(code, f.code->kind, f.code->bit);
        act[f.neuron] += (static_cast<double>(faulted) - static_cast<double>(code)) * f.code->code_scale;
    }
}

} // namespace

ShadowModel to_shadow(const Model &model) {
    ShadowModel s;
    s.input_dim = model.input_dim;
    for (const auto &l : model.layers)
        s.layers.push_back(dequantize_layer(l, l.weights_q, l.bias_q));
    return s;
}

ShadowModel to_shadow(const Model &model, const FetchedParams &params) {
    require(params.weights.size() == model.layers.size() && params.biases.size() == model.layers.size(),
            "fetched parameters do not cover the model");
    ShadowModel s;
    s.input_dim = model.input_dim;
    for (std::size_t i = 0; i < model.layers.size(); ++i)
        s.layers.push_back(dequantize_layer(model.layers[i], params.weights[i], params.biases[i]));
    return s;
}

ForwardTrace shadow_trace(const ShadowModel &model, std::span<const double> input,
                          std::span<const ActivationFault> activation_faults) {
    require(input.size() == model.input_dim, "input dimension does not match model");
    for (const auto &f : activation_faults)
        require(f.layer < model.layers.size() && model.layers[f.layer].relu,
                "activation faults must target a hidden (ReLU) layer");

    ForwardTrace t;
    t.activations.emplace_back(input.begin(), input.end());
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const auto &l = model.layers[li];
        const auto &a = t.activations.back();
        std::vector<double> z(l.out_dim);
        for (std::size_t o = 0; o < l.out_dim; ++o) {
            double acc = l.biases[o];
            const double *row = l.weights.data() + o * l.in_dim;
            for (std::size_t i = 0; i < l.in_dim; ++i)
                acc += row[i] * a[i];
            z[o] = acc;
        }
        std::vector<double> out = z;
        if (l.relu) {
            for (double &v : out)
                v = std::max(v, 0.0);
            apply_activation_faults(li, out, activation_faults);
        }
        t.pre.push_back(std::move(z));
        t.activations.push_back(std::move(out));
    }
    return t;
}

std::vector<double> shadow_forward(const ShadowModel &model, std::span<const double> input,
                                   std::span<const ActivationFault> activation_faults) {
    auto trace = shadow_trace(model, input, activation_faults);
    return std::move(trace.pre.back());
}

Gradients backward_from_logits(const ShadowModel &model, const ForwardTrace &trace,
                               std::span<const double> logit_grad) {
    require(logit_grad.size() == model.num_classes(), "logit gradient size mismatch");
    const std::size_t n = model.layers.size();
    Gradients g;
    g.weights.resize(n);
    g.biases.resize(n);

    std::vector<double> delta(logit_grad.begin(), logit_grad.end()); // d loss / d pre-activation
    for (std::size_t li = n; li-- > 0;) {
        const auto &l = model.layers[li];
        const auto &a = trace.activations[li];
        g.biases[li] = delta;
        g.weights[li].assign(l.out_dim * l.in_dim, 0.0);
        std::vector<double> upstream(l.in_dim, 0.0);
        for (std::size_t o = 0; o < l.out_dim; ++o) {
            const double d = delta[o];
            if (d == 0.0)
                continue;
            double *gw = g.weights[li].data() + o * l.in_dim;
            const double *row = l.weights.data() + o * l.in_dim;
            for (std::size_t i = 0; i < l.in_dim; ++i) {
                gw[i] = d * a[i];
                upstream[i] += d * row[i];
            }
        }
        if (li > 0 && model.layers[li - 1].relu) {
            const auto &z_prev = trace.pre[li - 1];
            const auto &a_prev = trace.activations[li];
            for (std::size_t i = 0; i < upstream.size(); ++i)
                // A disabled neuron's output no longer depends on its input.
                if (z_prev[i] <= 0.0 || a_prev[i] == 0.0)
                    upstream[i] = 0.0;
        }
        delta = std::move(upstream);
    }
    g.input = std::move(delta);
    return g;
}

Gradients backward(const ShadowModel &model, std::span<const double> input, std::size_t label) {
    const auto trace = shadow_trace(model, input);
    const auto logits = trace.logits();
    require(label < logits.size(), "label out of range");
    auto grad = softmax(logits);
    grad[label] -= 1.0;
    Gradients g = backward_from_logits(model, trace, grad);
    g.loss = cross_entropy(logits, label);
    return g;
}

Gradients backward(const Model &model, const InputImage &input, std::size_t label) {
    model.validate();
    return backward(to_shadow(model), dequantize_pixels(input.pixels), label);
}

std::vector<std::size_t> saliency_rank(const Model &model, const InputImage &input, std::size_t k) {
    require(k <= model.input_dim, "k exceeds input dimension");
    const auto shadow = to_shadow(model);
    const auto trace = shadow_trace(shadow, dequantize_pixels(input.pixels));
    require(input.label >= 0 && static_cast<std::size_t>(input.label) < model.num_classes(), "label out of range");
    std::vector<double> onehot(model.num_classes(), 0.0);
    onehot[static_cast<std::size_t>(input.label)] = 1.0;
    const auto g = backward_from_logits(shadow, trace, onehot);

    std::vector<std::size_t> order(model.input_dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(g.input[a]) > std::abs(g.input[b]); });
    order.resize(k);
    return order;
}

} // namespace nnfl
