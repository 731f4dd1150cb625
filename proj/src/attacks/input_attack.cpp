#include "nnfl/attacks/input_attack.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/quant.hpp"
#include "nnfl/rng.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

namespace nnfl {

namespace {

struct Candidate {
    std::int64_t pixel = 0;
    std::int64_t value = 0;
    double fitness = 0.0;
};

void require_correct(const ShadowModel &shadow, const InputImage &input, std::optional<std::size_t> target) {
    require(input.pixels.size() == shadow.input_dim, "input dimension does not match model");
    require(input.label >= 0 && static_cast<std::size_t>(input.label) < shadow.num_classes(), "label out of range");
    const auto label = static_cast<std::size_t>(input.label);
    require(argmax(shadow_forward(shadow, dequantize_pixels(input.pixels))) == label,
            "attack requires a correctly classified input");
    require(!target || (*target < shadow.num_classes() && *target != label),
            "target label must be a valid class different from the true label");
}

} // namespace

void DEConfig::validate() const {
    require(population >= 4, "DE population must be at least 4");
    require(scale_factor > 0.0, "DE scale factor must be positive");
}

PixelSelection select_pixels_de(const Model &model, const InputImage &input, std::size_t k, const DEConfig &config,
                                std::optional<std::size_t> target) {
    config.validate();
    require(k <= model.input_dim, "k exceeds input dimension");
    const ShadowModel shadow = to_shadow(model);
    require_correct(shadow, input, target);

    const auto label = static_cast<std::size_t>(input.label);
    std::vector<double> x = dequantize_pixels(input.pixels);
    const auto clean = softmax(shadow_forward(shadow, x));

    PixelSelection sel;
    // Best fitness seen per pixel over the whole run. The final population
    // usually collapses onto one pixel, so the k-set is drawn from this.
    std::vector<std::optional<double>> best(model.input_dim);
    const auto fitness = [&](const Candidate &c) {
        ++sel.queries;
        const auto p = static_cast<std::size_t>(c.pixel);
        const double saved = x[p];
        x[p] = pixel_value(static_cast<std::uint8_t>(c.value));
        const auto probs = softmax(shadow_forward(shadow, x));
        x[p] = saved;
        const double f = target ? probs[*target] - clean[*target] : clean[label] - probs[label];
        if (!best[p] || f > *best[p])
            best[p] = f;
        return f;
    };

    const auto d = static_cast<std::int64_t>(model.input_dim);
    Rng rng(config.seed);
    std::vector<Candidate> pop(config.population);
    for (auto &c : pop) {
        c.pixel = static_cast<std::int64_t>(uniform_index(rng, model.input_dim));
        c.value = static_cast<std::int64_t>(uniform_index(rng, 256));
        c.fitness = fitness(c);
    }

    const auto mutate = [&](std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t hi) {
        const double v = static_cast<double>(a) + config.scale_factor * static_cast<double>(b - c);
        return std::clamp<std::int64_t>(round_half_away(v), 0, hi);
    };

    const std::size_t n = pop.size();
    for (std::size_t g = 0; g < config.generations; ++g) {
        std::vector<Candidate> next = pop;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r1, r2, r3;
            do r1 = uniform_index(rng, n); while (r1 == i);
            do r2 = uniform_index(rng, n); while (r2 == i || r2 == r1);
            do r3 = uniform_index(rng, n); while (r3 == i || r3 == r1 || r3 == r2);
            Candidate trial;
            trial.pixel = mutate(pop[r1].pixel, pop[r2].pixel, pop[r3].pixel, d - 1);
            trial.value = mutate(pop[r1].value, pop[r2].value, pop[r3].value, 255);
            trial.fitness = fitness(trial);
            if (trial.fitness >= pop[i].fitness)
                next[i] = trial;
        }
        pop = std::move(next);
    }

    std::vector<std::size_t> order;
    for (std::size_t p = 0; p < best.size(); ++p)
        if (best[p])
            order.push_back(p);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *best[a] > *best[b]; });
    if (order.size() > k)
        order.resize(k);
    sel.pixels = std::move(order);
    sel.complete = sel.pixels.size() == k;
    return sel;
}

std::vector<PixelBitFault> OneBitOutcome::faults() const {
    std::vector<PixelBitFault> out;
    for (const auto &r : successes)
        for (const auto &f : r.faults)
            out.push_back({f.element, f.bit, f.kind});
    return out;
}

OneBitOutcome one_bit_attack(const Model &model, const InputImage &input, std::span<const std::size_t> pixels,
                             FaultKind kind, std::optional<std::size_t> target) {
    const ShadowModel shadow = to_shadow(model);
    require_correct(shadow, input, target);
    const auto label = static_cast<std::size_t>(input.label);

    std::vector<double> x = dequantize_pixels(input.pixels);
    const auto clean = softmax(shadow_forward(shadow, x));

    OneBitOutcome out;
    std::set<std::size_t> seen;
    for (std::size_t p : pixels) {
        require(p < model.input_dim, "pixel index out of range");
        if (!seen.insert(p).second)
            continue;
        const std::uint8_t byte = input.pixels[p];
        for (unsigned bit = 0; bit < 8; ++bit) {
            const std::uint8_t faulted = apply_fault<std::uint8_t>(byte, kind, bit);
            if (faulted == byte)
                continue;
            ++out.queries;
            x[p] = pixel_value(faulted);
            const auto probs = softmax(shadow_forward(shadow, x));
            x[p] = pixel_value(byte);
            const std::size_t after = argmax(probs);
            const bool success = target ? after == *target : after != label;
            if (!success)
                continue;
            AttackResult r;
            r.success = true;
            r.faults = {PixelBitFault{p, bit, kind}.to_bit_fault()};
            r.label_before = label;
            r.label_after = after;
            r.prob_before = clean[label];
            r.prob_after = probs[label];
            r.queries = 1;
            r.target = target;
            out.successes.push_back(verify_attack(model, std::move(r), input));
        }
    }
    return out;
}

OneBitOutcome exhaustive_input_oracle(const Model &model, const InputImage &input, FaultKind kind,
                                      std::optional<std::size_t> target) {
    std::vector<std::size_t> all(model.input_dim);
    std::iota(all.begin(), all.end(), 0);
    return one_bit_attack(model, input, all, kind, target);
}

ExistenceMetric sparse_attack_existence(const Model &model, std::span<const InputImage> inputs, FaultKind kind) {
    ExistenceMetric m;
    for (const auto &in : inputs) {
        ++m.images;
        if (predict(model, in) != static_cast<std::size_t>(in.label))
            continue;
        ++m.eligible;
        const auto oracle = exhaustive_input_oracle(model, in, kind);
        m.total_faults += oracle.successes.size();
        if (!oracle.successes.empty())
            ++m.vulnerable;
    }
    return m;
}

} // namespace nnfl
