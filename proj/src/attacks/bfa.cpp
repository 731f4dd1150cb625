#include "nnfl/attacks/bfa.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <tuple>

namespace nnfl {

namespace {

struct Batch {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
};

double mean_loss(const ShadowModel &m, const Batch &b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.x.size(); ++i)
        sum += cross_entropy(shadow_forward(m, b.x[i]), b.y[i]);
    return sum / static_cast<double>(b.x.size());
}

double batch_accuracy(const ShadowModel &m, const Batch &b) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < b.x.size(); ++i)
        ok += argmax(shadow_forward(m, b.x[i])) == b.y[i];
    return static_cast<double>(ok) / static_cast<double>(b.x.size());
}

struct Candidate {
    double estimate;
    std::size_t element;
    unsigned bit;
};

} // namespace

std::int8_t flip_int8(std::int8_t q, unsigned bit) {
    return static_cast<std::int8_t>(static_cast<std::uint8_t>(q) ^ static_cast<std::uint8_t>(1u << bit));
}

double bfa_estimate(double weight_grad, double w_scale, std::int8_t q, unsigned bit) {
    return weight_grad * w_scale * static_cast<double>(flip_int8(q, bit) - q);
}

std::vector<BitFault> BFAResult::faults() const {
    std::vector<BitFault> out;
    for (const auto &s : flips)
        out.push_back(s.fault);
    return out;
}

BFAResult bfa(const Model &model, FlashImage &flash, const MemoryMap &map, const Dataset &attack_batch,
              const BFAConfig &config) {
    model.validate();
    map.check_covers(model);
    require(!attack_batch.empty(), "BFA needs a non-empty attack batch");

    Batch batch;
    for (const auto &s : attack_batch.samples) {
        require(s.pixels.size() == model.input_dim, "attack batch dimension mismatch");
        require(s.label >= 0 && static_cast<std::size_t>(s.label) < model.num_classes(), "label out of range");
        batch.x.push_back(dequantize_pixels(s.pixels));
        batch.y.push_back(static_cast<std::size_t>(s.label));
    }

    Model current = model;
    ShadowModel shadow = to_shadow(current);
    double loss = mean_loss(shadow, batch);
    double acc = batch_accuracy(shadow, batch);
    require(acc > 1.0 / static_cast<double>(model.num_classes()), "BFA needs a model above chance on the attack batch");

    BFAResult result;
    result.accuracy_before = acc;
    while (true) {
        if (acc <= config.accuracy_threshold) {
            result.status = "threshold";
            break;
        }
        if (result.flips.size() >= config.max_flips) {
            result.status = "max_flips";
            break;
        }

        std::vector<std::vector<double>> grad(shadow.layers.size());
        for (std::size_t li = 0; li < shadow.layers.size(); ++li)
            grad[li].assign(shadow.layers[li].weights.size(), 0.0);
        for (std::size_t i = 0; i < batch.x.size(); ++i) {
            const auto g = backward(shadow, batch.x[i], batch.y[i]);
            for (std::size_t li = 0; li < grad.size(); ++li)
                for (std::size_t k = 0; k < grad[li].size(); ++k)
                    grad[li][k] += g.weights[li][k];
        }

        struct Best {
            double loss;
            std::size_t layer, element;
            unsigned bit;
        };
        std::optional<Best> best;
        for (std::size_t li = 0; li < current.layers.size(); ++li) {
            const auto &layer = current.layers[li];
            std::vector<Candidate> cands;
            cands.reserve(layer.weights_q.size() * 8);
            for (std::size_t e = 0; e < layer.weights_q.size(); ++e)
                for (unsigned b = 0; b < 8; ++b)
                    cands.push_back({bfa_estimate(grad[li][e], layer.w_scale, layer.weights_q[e], b), e, b});
            const std::size_t keep = std::min(config.topk, cands.size());
            std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                              [](const Candidate &a, const Candidate &b) {
                                  return std::tie(b.estimate, a.element, a.bit) < std::tie(a.estimate, b.element, b.bit);
                              });
            auto &w = shadow.layers[li].weights;
            for (std::size_t c = 0; c < keep; ++c) {
                const auto &cand = cands[c];
                const double saved = w[cand.element];
                w[cand.element] = layer.w_scale * static_cast<double>(flip_int8(layer.weights_q[cand.element], cand.bit));
                const double l = mean_loss(shadow, batch);
                w[cand.element] = saved;
                if (!best || l > best->loss)
                    best = Best{l, li, cand.element, cand.bit};
            }
        }

        if (!best || !(best->loss > loss)) {
            result.status = "stalled";
            break;
        }

        auto &q = current.layers[best->layer].weights_q[best->element];
        BitFlipStep step;
        step.fault = {Region::Weights, best->layer, best->element, best->bit, FaultKind::BitFlip};
        step.old_q = q;
        q = flip_int8(q, best->bit);
        step.new_q = q;
        shadow.layers[best->layer].weights[best->element] = current.layers[best->layer].w_scale * static_cast<double>(q);
        apply_permanent_fault(flash, fault_for_element(map, {Region::Weights, best->layer, best->element}, best->bit,
                                                       FaultKind::BitFlip, Persistence::Permanent));
        step.loss_before = loss;
        step.loss_after = best->loss;
        loss = best->loss;
        acc = batch_accuracy(shadow, batch);
        step.accuracy_after = acc;
        result.flips.push_back(step);
    }

    result.attacked = current;
    FaultedReader reader(flash, map);
    std::size_t ok = 0;
    for (const auto &s : attack_batch.samples)
        ok += predict(model, s, reader) == static_cast<std::size_t>(s.label);
    result.accuracy_after = static_cast<double>(ok) / static_cast<double>(attack_batch.size());
    return result;
}

} // namespace nnfl
