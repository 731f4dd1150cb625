#pragma once

// Random fault campaigns over one attack surface, and neuron-disable sweeps.

#include "nnfl/dataset.hpp"
#include "nnfl/memory.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nnfl {

enum class Surface : std::uint8_t { Weights, Biases, Inputs, Activations };

std::string_view to_string(Surface s);
Surface parse_surface(std::string_view text);

struct CampaignSpec {
    Surface surface = Surface::Weights;
    FaultKind kind = FaultKind::BitFlip;
    Persistence persistence = Persistence::TransientOnRead;
    std::size_t faults_per_trial = 1;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::optional<unsigned> bit; // fixed bit position; drawn uniformly when empty

    /// Activations and Inputs only accept transient faults.
    void validate() const;
};

/// One drawn fault. For Activations, `layer` is the hidden layer index.
struct CampaignFault {
    std::size_t layer = 0;
    std::size_t element = 0;
    unsigned bit = 0;
};

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<CampaignFault> faults;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

struct BitSensitivity {
    unsigned bit = 0;
    std::size_t faults = 0;  // faults drawn at this bit position
    double mean_drop = 0.0;  // mean (baseline - trial accuracy) over those faults
};

struct CampaignAggregates {
    double mean_accuracy = 0.0;
    double min_accuracy = 0.0;
    double degradation = 0.0; // baseline - mean
    std::vector<BitSensitivity> bit_histogram; // one entry per bit position of the surface
};

struct CampaignReport {
    CampaignSpec spec;
    std::size_t samples = 0;
    double baseline_accuracy = 0.0;
    std::vector<TrialRecord> records;
    CampaignAggregates aggregates;
};

/// Bits per element on the surface: 8 for weights, inputs and activation codes, 32 for biases.
unsigned surface_bit_width(Surface s);
/// Number of fault targets on the surface.
std::size_t surface_element_count(const Model &model, Surface s);

/// Per trial, draws faults_per_trial (element, bit) targets from a sub-seed of
/// (seed, trial), evaluates accuracy on `data`, and restores. Permanent faults
/// go to a per-trial copy of `flash`; `flash` itself is never modified.
CampaignReport random_fault_campaign(const Model &model, const FlashImage &flash, const MemoryMap &map,
                                     const Dataset &data, const CampaignSpec &spec);

/// Aggregates computed from baseline and records alone.
CampaignAggregates aggregate(const CampaignSpec &spec, double baseline, std::span<const TrialRecord> records);

struct SurfaceComparison {
    Surface surface = Surface::Weights;
    double mean_accuracy = 0.0;
    double degradation = 0.0;
};

std::vector<SurfaceComparison> compare_surfaces(std::span<const CampaignReport> reports);

/// Largest post-ReLU activation of each hidden layer over `data`, divided by 255.
std::vector<double> activation_code_scales(const Model &model, const Dataset &data);

struct NeuronDisableSpec {
    std::optional<std::size_t> layer; // hidden layer; defaults to the last one
    std::vector<double> fractions{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials = 20;
    std::uint64_t seed = 1;

    void validate() const;
};

struct DisableTrial {
    double fraction = 0.0;
    std::size_t trial = 0;
    std::vector<std::size_t> neurons;
    double misclassification = 0.0;
};

struct DisablePoint {
    double fraction = 0.0;
    std::size_t disabled = 0; // ceil(fraction * n)
    double mean_misclassification = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct DisableCurve {
    std::size_t layer = 0;
    std::size_t neurons = 0;
    std::size_t samples = 0;
    double baseline_error = 0.0;
    std::vector<DisableTrial> records;
    std::vector<DisablePoint> points;
    /// Smallest swept fraction with mean misclassification >= 0.5.
    std::optional<double> threshold_fraction;
};

DisableCurve neuron_disable_sweep(const Model &model, const Dataset &data, const NeuronDisableSpec &spec);

} // namespace nnfl
