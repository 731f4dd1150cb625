#include "nnfl/campaign.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/rng.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnfl {

void NeuronDisableSpec::validate() const {
    require(trials >= 1, "sweep needs at least one trial");
    require(!fractions.empty(), "sweep needs at least one fraction");
    require(std::is_sorted(fractions.begin(), fractions.end()), "fractions must be sorted ascending");
    for (double f : fractions)
        require(f >= 0.0 && f <= 1.0, "fractions must lie in [0,1]");
}

DisableCurve neuron_disable_sweep(const Model &model, const Dataset &data, const NeuronDisableSpec &spec) {
    spec.validate();
    model.validate();
    require(!data.empty(), "sweep dataset is empty");
    require(model.layers.size() >= 2, "neuron-disable sweep needs a hidden layer");
    DisableCurve c;
    c.layer = spec.layer.value_or(model.layers.size() - 2);
    require(c.layer + 1 < model.layers.size(), "sweep layer is not a hidden layer");
    c.neurons = model.layers[c.layer].out_dim;
    c.samples = data.size();

    const ShadowModel shadow = to_shadow(model);
    std::vector<std::vector<double>> xs;
    for (const auto &s : data.samples)
        xs.push_back(dequantize_pixels(s.pixels));
    const auto error_rate = [&](std::span<const ActivationFault> faults) {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            wrong += argmax(shadow_forward(shadow, xs[i], faults)) != static_cast<std::size_t>(data.samples[i].label);
        return static_cast<double>(wrong) / static_cast<double>(xs.size());
    };
    c.baseline_error = error_rate({});

    for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
        const double f = spec.fractions[fi];
        DisablePoint pt;
        pt.fraction = f;
        pt.disabled = std::min(c.neurons, static_cast<std::size_t>(std::ceil(f * static_cast<double>(c.neurons) - 1e-9)));
        double sum = 0.0;
        for (std::size_t t = 0; t < spec.trials; ++t) {
            Rng rng(derive_seed(spec.seed, fi * spec.trials + t));
            std::vector<std::size_t> order(c.neurons);
            std::iota(order.begin(), order.end(), 0);
            shuffle<std::size_t>(order, rng);
            order.resize(pt.disabled);
            std::sort(order.begin(), order.end());
            std::vector<ActivationFault> faults;
            for (std::size_t n : order)
                faults.push_back({c.layer, n, std::nullopt});
            DisableTrial rec{f, t, order, error_rate(faults)};
            sum += rec.misclassification;
            c.records.push_back(std::move(rec));
        }
        pt.mean_misclassification = sum / static_cast<double>(spec.trials);
        // Normal-approximation binomial interval over all trial predictions.
        const double n = static_cast<double>(spec.trials * data.size());
        const double p = pt.mean_misclassification;
        const double half = 1.96 * std::sqrt(p * (1.0 - p) / n);
        pt.ci_low = std::max(0.0, p - half);
        pt.ci_high = std::min(1.0, p + half);
        if (!c.threshold_fraction && p >= 0.5)
            c.threshold_fraction = f;
        c.points.push_back(pt);
    }
    return c;
}

} // namespace nnfl
