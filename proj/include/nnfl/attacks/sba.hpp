#pragma once

// Single bias attack: grow one stored bias until the target label wins on a
// whole evaluation set.

#include "nnfl/attacks/common.hpp"

namespace nnfl {

enum class SbaMode : std::uint8_t { OutputLayer, HiddenNeuron };

struct SBAResult {
    bool success = false;
    std::string status; // "ok", "unchanged", "bound", "no_favourable_neuron"
    ParameterChange change;
    double success_rate = 0.0; // fraction of eval set predicted as target at new_value
    std::size_t evaluations = 0;

    std::vector<BitFault> faults() const { return change.to_bit_faults(); }
};

/// Doubling search on the stored int32 value, then bisection to the smallest
/// value that succeeds. In HiddenNeuron mode the last hidden layer's neuron
/// whose outgoing weights favour the target most is used.
SBAResult sba(const Model &model, std::size_t target_label, const Dataset &eval_set,
              SbaMode mode = SbaMode::OutputLayer);

/// Fraction of `eval_set` predicted as `target` with bias (layer, index) set to `value`.
double sba_success_rate(const Model &model, std::size_t layer, std::size_t index, std::int32_t value,
                        std::size_t target, const Dataset &eval_set);

} // namespace nnfl
