#pragma once

// Real-valued view of a quantized model, with exact gradients.

#include "nnfl/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nnfl {

struct ShadowLayer {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::vector<double> weights; // [out_dim x in_dim]
    std::vector<double> biases;
    bool relu = false;
};

struct ShadowModel {
    std::size_t input_dim = 0;
    std::vector<ShadowLayer> layers;

    std::size_t num_classes() const { return layers.empty() ? 0 : layers.back().out_dim; }
};

/// Dequantized copy: weights = w_scale * q, biases = b_scale * q.
ShadowModel to_shadow(const Model &model);
ShadowModel to_shadow(const Model &model, const FetchedParams &params);

/// Pre-activations and activations of every layer; `activations[0]` is the input.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> activations;

    std::span<const double> logits() const { return pre.back(); }
};

ForwardTrace shadow_trace(const ShadowModel &model, std::span<const double> input,
                          std::span<const ActivationFault> activation_faults = {});
std::vector<double> shadow_forward(const ShadowModel &model, std::span<const double> input,
                                   std::span<const ActivationFault> activation_faults = {});

struct Gradients {
    std::vector<std::vector<double>> weights; // d loss / d real weight, per layer
    std::vector<std::vector<double>> biases;
    std::vector<double> input; // d loss / d dequantized input value
    double loss = 0.0;
};

/// Backpropagates an arbitrary upstream gradient on the logits.
Gradients backward_from_logits(const ShadowModel &model, const ForwardTrace &trace,
                               std::span<const double> logit_grad);

/// Gradients of cross_entropy(forward(x), label) on the real shadow.
Gradients backward(const ShadowModel &model, std::span<const double> input, std::size_t label);
Gradients backward(const Model &model, const InputImage &input, std::size_t label);

/// Pixels ranked by |d logit_true / d pixel| descending, ties by lowest
/// index. The true class is `input.label`.
std::vector<std::size_t> saliency_rank(const Model &model, const InputImage &input, std::size_t k);

} // namespace nnfl
