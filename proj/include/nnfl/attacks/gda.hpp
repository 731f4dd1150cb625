#pragma once

// Gradient descent on the parameters for one input, compressed to the few
// largest changes and re-quantized.

#include "nnfl/attacks/common.hpp"

namespace nnfl {

struct GDAConfig {
    double learning_rate = 0.1;
    std::size_t steps = 200;
    std::size_t keep_k = 1;
    std::size_t max_keep_k = 0; // 0 = every parameter
};

struct GDAResult {
    bool success = false;
    std::string status; // "ok", "no_perturbation", "infeasible"
    std::vector<ParameterChange> changes; // nonzero stored deltas only
    std::size_t keep_k = 0;               // budget of the successful (or last) round
    std::size_t label_before = 0;
    std::size_t label_after = 0;
    double target_probability = 0.0;

    std::vector<BitFault> faults() const;
};

/// Keeps the keep_k largest-magnitude changes of a full descent, re-optimizes
/// only those, quantizes, and checks the target label. Doubles keep_k on
/// failure.
GDAResult gda(const Model &model, const InputImage &input, std::size_t target, const GDAConfig &config);

} // namespace nnfl
