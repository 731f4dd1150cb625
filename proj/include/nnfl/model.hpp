#pragma once

#include "nnfl/fault_kind.hpp"
#include "nnfl/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nnfl {

/// Fully-connected layer with int8 weights and int32 biases.
/// Real weight = w_scale * weights_q, real bias = b_scale * bias_q.
struct DenseLayer {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::vector<std::int8_t> weights_q; // [out_dim x in_dim], row-major
    std::vector<std::int32_t> bias_q;   // [out_dim]
    double w_scale = 1.0;
    double b_scale = 1.0;
    bool relu = false; // ReLU applied to this layer's output

    bool operator==(const DenseLayer &) const = default;
};

/// Dense/ReLU stack ending with a logit-producing dense layer.
struct Model {
    std::size_t input_dim = 0;
    std::vector<DenseLayer> layers;

    std::size_t num_classes() const { return layers.empty() ? 0 : layers.back().out_dim; }
    std::size_t weight_count() const;
    std::size_t bias_count() const;
    std::size_t parameter_count() const { return weight_count() + bias_count(); }
    /// Indices of layers whose outputs go through ReLU.
    std::vector<std::size_t> hidden_layers() const;

    /// Throws ContractViolation when dimensions do not chain, C < 2, or
    /// a stored weight lies outside [-128, 127] bounds of its scheme.
    void validate() const;

    bool operator==(const Model &) const = default;
};

/// 8-bit grayscale input. Dequantized value = pixel / 255.
struct InputImage {
    std::vector<std::uint8_t> pixels;
    int label = 0;
};

inline double pixel_value(std::uint8_t p) { return static_cast<double>(p) / 255.0; }
std::vector<double> dequantize_pixels(std::span<const std::uint8_t> pixels);

/// Quantized values as seen by one inference, after every read has gone
/// through a MemoryReader.
struct FetchedParams {
    std::vector<std::vector<std::int8_t>> weights;
    std::vector<std::vector<std::int32_t>> biases;
    std::vector<std::uint8_t> pixels;
};

/// Resolves every parameter and input read of one inference. Implementations
/// may inject faults and keep read counters, so fetch is non-const.
class MemoryReader {
  public:
    virtual ~MemoryReader() = default;
    virtual FetchedParams fetch(const Model &model, const InputImage &input) = 0;
};

/// Fault-free reader returning the model's own arrays.
class DirectReader final : public MemoryReader {
  public:
    FetchedParams fetch(const Model &model, const InputImage &input) override;
};

/// Functional fault on a hidden activation (after ReLU). Without `bit`, the
/// activation is forced to zero (disabled neuron). With `bit`, the value is
/// encoded as an unsigned 8-bit code with `code_scale`, the bit fault is
/// applied to the code, and the code delta is added back.
struct ActivationFault {
    struct CodeFault {
        FaultKind kind = FaultKind::BitFlip;
        unsigned bit = 0; // 0..7
        double code_scale = 1.0;
    };

    std::size_t layer = 0;
    std::size_t neuron = 0;
    std::optional<CodeFault> code;
};

/// Evaluates the model on already-fetched quantized values.
std::vector<double> evaluate_fetched(const Model &model, const FetchedParams &params,
                                     std::span<const ActivationFault> activation_faults = {});

Tensor forward(const Model &model, const InputImage &input, MemoryReader &reader,
               std::span<const ActivationFault> activation_faults = {});

std::size_t predict(const Model &model, const InputImage &input, MemoryReader &reader,
                    std::span<const ActivationFault> activation_faults = {});

/// Convenience: predict through a DirectReader.
std::size_t predict(const Model &model, const InputImage &input);

Tensor softmax(const Tensor &logits);
std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[label], computed via log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t label);

} // namespace nnfl
