#pragma once

// Sparse input-side attacks: DE pixel selection followed by an exhaustive
// single-bit search over the chosen pixels.

#include "nnfl/attacks/common.hpp"

namespace nnfl {

struct DEConfig {
    std::size_t population = 64;
    double scale_factor = 0.5;
    std::size_t generations = 50;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PixelSelection {
    std::vector<std::size_t> pixels;
    /// False when fewer than k distinct pixels were ever evaluated.
    bool complete = true;
    std::size_t queries = 0;
};

/// DE/rand/1 without crossover over (pixel index, replacement byte)
/// candidates. Fitness is the drop of the true-class probability, or the rise
/// of the target-class probability when targeted.
PixelSelection select_pixels_de(const Model &model, const InputImage &input, std::size_t k, const DEConfig &config,
                                std::optional<std::size_t> target = std::nullopt);

struct OneBitOutcome {
    std::vector<AttackResult> successes; // one per successful single-bit fault, verified
    std::size_t queries = 0;

    std::vector<PixelBitFault> faults() const;
};

/// Tries every bit of every listed pixel. BitSet/BitReset candidates that would
/// not change the byte are skipped and not counted as queries.
OneBitOutcome one_bit_attack(const Model &model, const InputImage &input, std::span<const std::size_t> pixels,
                             FaultKind kind, std::optional<std::size_t> target = std::nullopt);

/// one_bit_attack over all d pixels.
OneBitOutcome exhaustive_input_oracle(const Model &model, const InputImage &input, FaultKind kind,
                                      std::optional<std::size_t> target = std::nullopt);

struct ExistenceMetric {
    std::size_t images = 0;     // inputs considered
    std::size_t eligible = 0;   // correctly predicted
    std::size_t vulnerable = 0; // eligible with >= 1 successful single-bit fault
    std::size_t total_faults = 0;

    double fraction() const { return eligible == 0 ? 0.0 : static_cast<double>(vulnerable) / static_cast<double>(eligible); }
};

/// Fraction of correctly classified inputs that admit a misclassifying
/// single-bit input fault, by exhaustive enumeration.
ExistenceMetric sparse_attack_existence(const Model &model, std::span<const InputImage> inputs, FaultKind kind);

} // namespace nnfl
