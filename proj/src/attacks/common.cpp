#include "nnfl/attacks/common.hpp"

#include "nnfl/errors.hpp"

#include <set>
#include <tuple>

namespace nnfl {

void AttackBudget::validate(std::size_t original_label) const {
    require(max_dims >= 1, "attack budget needs max_dims >= 1");
    require(!target || *target != original_label, "target label must differ from the original prediction");
}

std::vector<BitFault> ParameterChange::to_bit_faults() const {
    std::vector<BitFault> out;
    if (region == Region::Weights) {
        const auto diff = static_cast<std::uint8_t>(static_cast<std::uint8_t>(old_value) ^ static_cast<std::uint8_t>(new_value));
        for (unsigned b = 0; b < 8; ++b)
            if ((diff >> b) & 1u)
                out.push_back({region, layer, element, b, FaultKind::BitFlip});
    } else {
        const std::uint32_t diff = static_cast<std::uint32_t>(old_value) ^ static_cast<std::uint32_t>(new_value);
        for (unsigned b = 0; b < 32; ++b)
            if ((diff >> b) & 1u)
                out.push_back({region, layer, element, b, FaultKind::BitFlip});
    }
    return out;
}

InputImage apply_pixel_faults(const InputImage &input, std::span<const PixelBitFault> faults) {
    InputImage out = input;
    for (const auto &f : faults) {
        require(f.pixel < out.pixels.size(), "pixel fault index out of range");
        require(f.bit < 8, "pixel fault bit must be in [0,7]");
        out.pixels[f.pixel] = apply_fault<std::uint8_t>(out.pixels[f.pixel], f.kind, f.bit);
    }
    return out;
}

Model apply_parameter_faults(const Model &model, std::span<const BitFault> faults) {
    Model out = model;
    for (const auto &f : faults) {
        if (f.region == Region::Input)
            continue;
        require(f.layer < out.layers.size(), "fault layer out of range");
        auto &l = out.layers[f.layer];
        if (f.region == Region::Weights) {
            require(f.element < l.weights_q.size() && f.bit < 8, "weight fault out of range");
            auto &q = l.weights_q[f.element];
            q = static_cast<std::int8_t>(apply_fault<std::uint8_t>(static_cast<std::uint8_t>(q), f.kind, f.bit));
        } else {
            require(f.element < l.bias_q.size() && f.bit < 32, "bias fault out of range");
            auto &b = l.bias_q[f.element];
            b = static_cast<std::int32_t>(apply_fault<std::uint32_t>(static_cast<std::uint32_t>(b), f.kind, f.bit));
        }
    }
    return out;
}

std::vector<FaultSpec> to_fault_specs(const MemoryMap &map, std::span<const BitFault> faults) {
    std::vector<FaultSpec> out;
    out.reserve(faults.size());
    for (const auto &f : faults) {
        const auto persistence = f.region == Region::Input ? Persistence::TransientOnRead : Persistence::Permanent;
        out.push_back(fault_for_element(map, {f.region, f.region == Region::Input ? 0 : f.layer, f.element}, f.bit,
                                        f.kind, persistence));
    }
    return out;
}

Replay replay_faults(const Model &model, std::span<const BitFault> faults, std::span<const InputImage> inputs) {
    const PackedModel packed = pack_model(model, false);
    FlashImage flash = packed.flash;
    std::vector<FaultSpec> transient;
    for (const auto &spec : to_fault_specs(packed.map, faults)) {
        if (spec.persistence == Persistence::Permanent)
            apply_permanent_fault(flash, spec);
        else
            transient.push_back(spec);
    }
    Replay r;
    for (const auto &in : inputs) {
        FaultedReader reader(flash, packed.map, transient);
        const Tensor logits = forward(model, in, reader);
        r.labels.push_back(argmax(logits.data()));
        r.probabilities.push_back(softmax(logits.data()));
    }
    return r;
}

AttackResult verify_attack(const Model &model, AttackResult claimed, const InputImage &input) {
    const std::span<const InputImage> one(&input, 1);
    const Replay clean = replay_faults(model, {}, one);
    const Replay faulted = replay_faults(model, claimed.faults, one);
    const std::size_t before = clean.labels[0];
    const std::size_t after = faulted.labels[0];
    const bool success = claimed.target ? after == *claimed.target : after != before;
    claimed.verified = before == claimed.label_before && after == claimed.label_after && success == claimed.success;
    return claimed;
}

std::size_t altered_dimensions(std::span<const BitFault> faults) {
    std::set<std::tuple<Region, std::size_t, std::size_t>> dims;
    for (const auto &f : faults)
        dims.insert({f.region, f.region == Region::Input ? 0 : f.layer, f.element});
    return dims.size();
}

bool within_budget(const AttackResult &result, const AttackBudget &budget) {
    return altered_dimensions(result.faults) <= budget.max_dims && result.faults.size() <= budget.max_bits;
}

} // namespace nnfl
