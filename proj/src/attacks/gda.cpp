#include "nnfl/attacks/gda.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/quant.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnfl {

namespace {

struct ParamRef {
    Region region;
    std::size_t layer;
    std::size_t element;
};

std::vector<ParamRef> enumerate_params(const Model &m) {
    std::vector<ParamRef> refs;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        for (std::size_t e = 0; e < m.layers[l].weights_q.size(); ++e)
            refs.push_back({Region::Weights, l, e});
        for (std::size_t e = 0; e < m.layers[l].bias_q.size(); ++e)
            refs.push_back({Region::Biases, l, e});
    }
    return refs;
}

double &param(ShadowModel &s, const ParamRef &r) {
    auto &l = s.layers[r.layer];
    return r.region == Region::Weights ? l.weights[r.element] : l.biases[r.element];
}

double grad_of(const Gradients &g, const ParamRef &r) {
    return r.region == Region::Weights ? g.weights[r.layer][r.element] : g.biases[r.layer][r.element];
}

/// Projected descent on the listed parameters; weights stay inside the int8 range.
ShadowModel descend(const Model &model, ShadowModel s, std::span<const ParamRef> params, std::span<const double> x,
                    std::size_t target, const GDAConfig &cfg) {
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const auto g = backward(s, x, target);
        for (const auto &r : params) {
            double &p = param(s, r);
            p -= cfg.learning_rate * grad_of(g, r);
            if (r.region == Region::Weights) {
                const double lim = QuantScheme::qmax * model.layers[r.layer].w_scale;
                p = std::clamp(p, -lim, lim);
            }
        }
    }
    return s;
}

} // namespace

std::vector<BitFault> GDAResult::faults() const {
    std::vector<BitFault> out;
    for (const auto &c : changes) {
        const auto f = c.to_bit_faults();
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

GDAResult gda(const Model &model, const InputImage &input, std::size_t target, const GDAConfig &config) {
    model.validate();
    require(target < model.num_classes(), "target label out of range");
    require(config.learning_rate > 0.0, "GDA learning rate must be positive");
    const ShadowModel base = to_shadow(model);
    const std::vector<double> x = dequantize_pixels(input.pixels);
    require(x.size() == model.input_dim, "input dimension does not match model");

    GDAResult r;
    r.label_before = argmax(shadow_forward(base, x));
    require(r.label_before != target, "GDA target must differ from the clean prediction");
    r.label_after = r.label_before;
    r.target_probability = softmax(shadow_forward(base, x))[target];
    if (config.steps == 0) {
        r.status = "no_perturbation";
        return r;
    }

    const auto refs = enumerate_params(model);
    ShadowModel full = descend(model, base, refs, x, target, config);
    ShadowModel base_copy = base;
    std::vector<double> delta(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i)
        delta[i] = std::abs(param(full, refs[i]) - param(base_copy, refs[i]));
    std::vector<std::size_t> order(refs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return delta[a] > delta[b]; });

    const std::size_t cap = config.max_keep_k == 0 ? refs.size() : std::min(config.max_keep_k, refs.size());
    std::size_t k = std::clamp<std::size_t>(config.keep_k, 1, cap);
    while (true) {
        std::vector<ParamRef> kept;
        for (std::size_t i = 0; i < k; ++i)
            kept.push_back(refs[order[i]]);
        ShadowModel tuned = descend(model, base, kept, x, target, config);

        Model attacked = model;
        r.changes.clear();
        for (const auto &p : kept) {
            auto &layer = attacked.layers[p.layer];
            if (p.region == Region::Weights) {
                const double v = param(tuned, p);
                const auto q = quantize_with_scale(std::span<const double>(&v, 1), layer.w_scale)[0];
                if (q != layer.weights_q[p.element])
                    r.changes.push_back({p.region, p.layer, p.element, layer.weights_q[p.element], q});
                layer.weights_q[p.element] = q;
            } else {
                const auto q = quantize_bias(param(tuned, p), layer.b_scale);
                if (q != layer.bias_q[p.element])
                    r.changes.push_back({p.region, p.layer, p.element, layer.bias_q[p.element], q});
                layer.bias_q[p.element] = q;
            }
        }
        r.keep_k = k;
        const auto logits = shadow_forward(to_shadow(attacked), x);
        r.label_after = argmax(logits);
        r.target_probability = softmax(logits)[target];
        if (r.label_after == target) {
            r.success = true;
            r.status = "ok";
            return r;
        }
        if (k >= cap) {
            r.status = "infeasible";
            return r;
        }
        k = std::min(2 * k, cap);
    }
}

} // namespace nnfl
