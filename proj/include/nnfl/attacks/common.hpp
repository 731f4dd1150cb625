#pragma once

#include "nnfl/dataset.hpp"
#include "nnfl/memory.hpp"
#include "nnfl/model.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nnfl {

/// l0 budget. `target` makes the attack targeted.
struct AttackBudget {
    std::size_t max_dims = 1;
    std::size_t max_bits = 1;
    std::optional<std::size_t> target;

    void validate(std::size_t original_label) const;
};

/// Bit fault on one stored element, addressed logically. `bit` is relative to
/// the element (0..7 for int8 weights and pixels, 0..31 for biases).
struct BitFault {
    Region region = Region::Input;
    std::size_t layer = 0;
    std::size_t element = 0;
    unsigned bit = 0;
    FaultKind kind = FaultKind::BitFlip;

    auto operator<=>(const BitFault &) const = default;
};

struct PixelBitFault {
    std::size_t pixel = 0;
    unsigned bit = 0; // 0..7, pixel LSB = 0
    FaultKind kind = FaultKind::BitFlip;

    BitFault to_bit_fault() const { return {Region::Input, 0, pixel, bit, kind}; }
    auto operator<=>(const PixelBitFault &) const = default;
};

/// Change of one stored parameter value, as produced by SBA and GDA.
struct ParameterChange {
    Region region = Region::Biases;
    std::size_t layer = 0;
    std::size_t element = 0;
    std::int32_t old_value = 0;
    std::int32_t new_value = 0;

    /// One BitFlip per differing bit of the stored representation.
    std::vector<BitFault> to_bit_faults() const;
};

struct AttackResult {
    bool success = false;
    std::vector<BitFault> faults;
    std::size_t label_before = 0;
    std::size_t label_after = 0;
    double prob_before = 0.0; // probability of label_before on the clean input
    double prob_after = 0.0;  // probability of label_before under the faults
    std::size_t queries = 0;
    bool verified = false;
    std::optional<std::size_t> target;
};

InputImage apply_pixel_faults(const InputImage &input, std::span<const PixelBitFault> faults);

/// Parameters with the logical faults applied directly to the quantized arrays.
/// Input-region faults are ignored here.
Model apply_parameter_faults(const Model &model, std::span<const BitFault> faults);

/// Translates logical faults into memory faults. Input faults become transient
/// reads of the input buffer; parameter faults become permanent flips.
std::vector<FaultSpec> to_fault_specs(const MemoryMap &map, std::span<const BitFault> faults);

/// Independent re-execution: packs the model, applies parameter faults to a
/// private flash copy, injects input faults on read, and returns the labels.
struct Replay {
    std::vector<std::size_t> labels;
    std::vector<std::vector<double>> probabilities;
};
Replay replay_faults(const Model &model, std::span<const BitFault> faults, std::span<const InputImage> inputs);

/// Re-runs inference with `claimed.faults` and sets `verified` when the
/// recomputed label matches the claim and the success condition agrees.
AttackResult verify_attack(const Model &model, AttackResult claimed, const InputImage &input);

/// Number of distinct (region, layer, element) touched.
std::size_t altered_dimensions(std::span<const BitFault> faults);
bool within_budget(const AttackResult &result, const AttackBudget &budget);

} // namespace nnfl
