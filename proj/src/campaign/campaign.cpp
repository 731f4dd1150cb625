#include "nnfl/campaign.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/rng.hpp"
#include "nnfl/shadow.hpp"

#include <algorithm>

namespace nnfl {

namespace {

/// (layer, count) for every layer that contributes elements to the surface.
std::vector<std::pair<std::size_t, std::size_t>> surface_layers(const Model &model, Surface s) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    switch (s) {
    case Surface::Weights:
        for (std::size_t l = 0; l < model.layers.size(); ++l)
            out.emplace_back(l, model.layers[l].weights_q.size());
        break;
    case Surface::Biases:
        for (std::size_t l = 0; l < model.layers.size(); ++l)
            out.emplace_back(l, model.layers[l].bias_q.size());
        break;
    case Surface::Inputs:
        out.emplace_back(0, model.input_dim);
        break;
    case Surface::Activations:
        for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
            out.emplace_back(l, model.layers[l].out_dim);
        break;
    }
    return out;
}

CampaignFault draw_fault(const std::vector<std::pair<std::size_t, std::size_t>> &layers, std::size_t total,
                         const CampaignSpec &spec, Rng &rng) {
    std::size_t idx = uniform_index(rng, total);
    CampaignFault f;
    for (const auto &[layer, count] : layers) {
        if (idx < count) {
            f.layer = layer;
            f.element = idx;
            break;
        }
        idx -= count;
    }
    f.bit = spec.bit ? *spec.bit : static_cast<unsigned>(uniform_index(rng, surface_bit_width(spec.surface)));
    return f;
}

Region region_of(Surface s) {
    switch (s) {
    case Surface::Weights:
        return Region::Weights;
    case Surface::Biases:
        return Region::Biases;
    default:
        return Region::Input;
    }
}

} // namespace

std::string_view to_string(Surface s) {
    switch (s) {
    case Surface::Weights:
        return "weights";
    case Surface::Biases:
        return "biases";
    case Surface::Inputs:
        return "inputs";
    case Surface::Activations:
        return "activations";
    }
    return "?";
}

Surface parse_surface(std::string_view text) {
    if (text == "weights")
        return Surface::Weights;
    if (text == "biases")
        return Surface::Biases;
    if (text == "inputs")
        return Surface::Inputs;
    if (text == "activations")
        return Surface::Activations;
    throw ContractViolation("unknown surface: " + std::string(text));
}

void CampaignSpec::validate() const {
    require(trials >= 1, "campaign needs at least one trial");
    require(faults_per_trial >= 1, "campaign needs at least one fault per trial");
    require(!bit || *bit < surface_bit_width(surface), "fixed bit outside the surface element width");
    require(persistence == Persistence::TransientOnRead || surface == Surface::Weights || surface == Surface::Biases,
            "input and activation campaigns are transient only");
}

unsigned surface_bit_width(Surface s) { return s == Surface::Biases ? 32u : 8u; }

std::size_t surface_element_count(const Model &model, Surface s) {
    std::size_t n = 0;
    for (const auto &[layer, count] : surface_layers(model, s))
        n += count;
    return n;
}

std::vector<double> activation_code_scales(const Model &model, const Dataset &data) {
    const ShadowModel shadow = to_shadow(model);
    std::vector<double> mx(model.layers.size() - 1, 0.0);
    for (const auto &s : data.samples) {
        const auto t = shadow_trace(shadow, dequantize_pixels(s.pixels));
        for (std::size_t l = 0; l < mx.size(); ++l)
            for (double a : t.activations[l + 1])
                mx[l] = std::max(mx[l], a);
    }
    for (double &v : mx)
        v = v > 0.0 ? v / 255.0 : 1.0 / 255.0;
    return mx;
}

CampaignAggregates aggregate(const CampaignSpec &spec, double baseline, std::span<const TrialRecord> records) {
    CampaignAggregates a;
    const unsigned width = surface_bit_width(spec.surface);
    std::vector<double> drop_sum(width, 0.0);
    std::vector<std::size_t> count(width, 0);
    a.min_accuracy = records.empty() ? baseline : 1.0;
    double sum = 0.0;
    for (const auto &r : records) {
        sum += r.accuracy;
        a.min_accuracy = std::min(a.min_accuracy, r.accuracy);
        for (const auto &f : r.faults) {
            drop_sum[f.bit] += baseline - r.accuracy;
            ++count[f.bit];
        }
    }
    a.mean_accuracy = records.empty() ? baseline : sum / static_cast<double>(records.size());
    a.degradation = baseline - a.mean_accuracy;
    for (unsigned b = 0; b < width; ++b)
        a.bit_histogram.push_back({b, count[b], count[b] == 0 ? 0.0 : drop_sum[b] / static_cast<double>(count[b])});
    return a;
}

CampaignReport random_fault_campaign(const Model &model, const FlashImage &flash, const MemoryMap &map,
                                     const Dataset &data, const CampaignSpec &spec) {
    spec.validate();
    model.validate();
    require(!data.empty(), "campaign dataset is empty");
    require(data.dim == model.input_dim, "dataset dimension does not match model");
    const auto layers = surface_layers(model, spec.surface);
    const std::size_t total = surface_element_count(model, spec.surface);
    require(total > 0, "campaign surface has no elements");

    CampaignReport rep;
    rep.spec = spec;
    rep.samples = data.size();
    {
        FaultedReader clean(flash, map);
        std::size_t ok = 0;
        for (const auto &s : data.samples)
            ok += predict(model, s, clean) == static_cast<std::size_t>(s.label);
        rep.baseline_accuracy = static_cast<double>(ok) / static_cast<double>(data.size());
    }
    const std::vector<double> code_scales =
        spec.surface == Surface::Activations ? activation_code_scales(model, data) : std::vector<double>{};

    for (std::size_t t = 0; t < spec.trials; ++t) {
        TrialRecord rec;
        rec.trial = t;
        rec.seed = derive_seed(spec.seed, t);
        Rng rng(rec.seed);
        for (std::size_t i = 0; i < spec.faults_per_trial; ++i)
            rec.faults.push_back(draw_fault(layers, total, spec, rng));

        std::vector<FaultSpec> transient;
        std::vector<ActivationFault> act;
        FlashImage image = flash;
        for (const auto &f : rec.faults) {
            if (spec.surface == Surface::Activations) {
                act.push_back({f.layer, f.element, ActivationFault::CodeFault{spec.kind, f.bit, code_scales[f.layer]}});
                continue;
            }
            const ElementKey key{region_of(spec.surface), f.layer, f.element};
            const auto fs = fault_for_element(map, key, f.bit, spec.kind, spec.persistence);
            if (spec.persistence == Persistence::Permanent)
                apply_permanent_fault(image, fs);
            else
                transient.push_back(fs);
        }
        FaultedReader reader(image, map, std::move(transient));
        for (const auto &s : data.samples)
            rec.correct += predict(model, s, reader, act) == static_cast<std::size_t>(s.label);
        rec.accuracy = static_cast<double>(rec.correct) / static_cast<double>(data.size());
        rep.records.push_back(std::move(rec));
    }
    rep.aggregates = aggregate(spec, rep.baseline_accuracy, rep.records);
    return rep;
}

std::vector<SurfaceComparison> compare_surfaces(std::span<const CampaignReport> reports) {
    std::vector<SurfaceComparison> out;
    for (const auto &r : reports)
        out.push_back({r.spec.surface, r.aggregates.mean_accuracy, r.aggregates.degradation});
    return out;
}

} // namespace nnfl
