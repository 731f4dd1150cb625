#pragma once

// Progressive bit search over stored int8 weights.

#include "nnfl/attacks/common.hpp"

namespace nnfl {

struct BFAConfig {
    std::size_t max_flips = 50;
    std::size_t topk = 10; // candidates evaluated exactly, per layer
    double accuracy_threshold = 0.2;
};

struct BitFlipStep {
    BitFault fault; // Region::Weights, BitFlip
    int old_q = 0;
    int new_q = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double accuracy_after = 0.0;
};

struct BFAResult {
    std::vector<BitFlipStep> flips;
    std::string status; // "threshold", "max_flips", "stalled"
    double accuracy_before = 0.0;
    double accuracy_after = 0.0; // measured through the faulted flash
    Model attacked;

    std::vector<BitFault> faults() const;
};

/// Every accepted flip strictly increases the mean attack-batch loss and is
/// written to `flash` as a permanent fault.
BFAResult bfa(const Model &model, FlashImage &flash, const MemoryMap &map, const Dataset &attack_batch,
              const BFAConfig &config);

/// First-order loss change estimate for flipping `bit` of a weight.
double bfa_estimate(double weight_grad, double w_scale, std::int8_t q, unsigned bit);

/// Two's-complement int8 value after flipping `bit`.
std::int8_t flip_int8(std::int8_t q, unsigned bit);

} // namespace nnfl
