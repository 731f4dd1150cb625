#include "nnfl/attacks/sba.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <limits>

namespace nnfl {

double sba_success_rate(const Model &model, std::size_t layer, std::size_t index, std::int32_t value,
                        std::size_t target, const Dataset &eval_set) {
    require(layer < model.layers.size() && index < model.layers[layer].out_dim, "bias index out of range");
    if (eval_set.empty())
        return 0.0;
    ShadowModel shadow = to_shadow(model);
    shadow.layers[layer].biases[index] = model.layers[layer].b_scale * static_cast<double>(value);
    std::size_t hits = 0;
    for (const auto &s : eval_set.samples)
        hits += argmax(shadow_forward(shadow, dequantize_pixels(s.pixels))) == target;
    return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

SBAResult sba(const Model &model, std::size_t target_label, const Dataset &eval_set, SbaMode mode) {
    model.validate();
    require(target_label < model.num_classes(), "target label out of range");
    require(!eval_set.empty(), "SBA needs a non-empty evaluation set");

    SBAResult r;
    std::size_t layer = model.layers.size() - 1;
    std::size_t index = target_label;
    if (mode == SbaMode::HiddenNeuron) {
        const auto hidden = model.hidden_layers();
        require(!hidden.empty(), "hidden-neuron SBA needs a ReLU layer");
        layer = hidden.back();
        const auto &out = model.layers[layer + 1];
        // Neuron whose outgoing weights favour the target over every other class the most.
        int best_margin = std::numeric_limits<int>::min();
        for (std::size_t j = 0; j < out.in_dim; ++j) {
            int margin = std::numeric_limits<int>::max();
            for (std::size_t c = 0; c < out.out_dim; ++c)
                if (c != target_label)
                    margin = std::min(margin, out.weights_q[target_label * out.in_dim + j] - out.weights_q[c * out.in_dim + j]);
            if (margin > best_margin) {
                best_margin = margin;
                index = j;
            }
        }
        if (best_margin <= 0) {
            r.status = "no_favourable_neuron";
            r.change = {Region::Biases, layer, index, model.layers[layer].bias_q[index], model.layers[layer].bias_q[index]};
            return r;
        }
    }

    const std::int32_t original = model.layers[layer].bias_q[index];
    r.change = {Region::Biases, layer, index, original, original};
    const auto succeeds = [&](std::int64_t v) {
        ++r.evaluations;
        return sba_success_rate(model, layer, index, static_cast<std::int32_t>(v), target_label, eval_set) == 1.0;
    };

    constexpr std::int64_t kMax = std::numeric_limits<std::int32_t>::max();
    if (succeeds(original)) {
        r.success = true;
        r.status = "unchanged";
        r.success_rate = 1.0;
        return r;
    }

    std::int64_t lo = original;
    std::int64_t hi = original < 1 ? 1 : std::min<std::int64_t>(2 * static_cast<std::int64_t>(original), kMax);
    while (!succeeds(hi)) {
        if (hi == kMax) {
            r.status = "bound";
            r.change.new_value = static_cast<std::int32_t>(kMax);
            r.success_rate = sba_success_rate(model, layer, index, r.change.new_value, target_label, eval_set);
            return r;
        }
        lo = hi;
        hi = std::min(2 * hi, kMax);
    }
    // Success is monotone in the stored value: lo fails, hi succeeds.
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (succeeds(mid))
            hi = mid;
        else
            lo = mid;
    }
    r.success = true;
    r.status = "ok";
    r.change.new_value = static_cast<std::int32_t>(hi);
    r.success_rate = 1.0;
    return r;
}

} // namespace nnfl
