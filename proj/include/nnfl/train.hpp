#pragma once

#include "nnfl/dataset.hpp"
#include "nnfl/model.hpp"
#include "nnfl/shadow.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nnfl {

struct Architecture {
    std::vector<std::size_t> hidden{32};
    std::size_t num_classes = 10;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
};

struct TrainResult {
    Model model;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0; // 0 when no test set was given
};

/// Mini-batch SGD on a real-valued network, then per-layer quantization.
/// Deterministic for a fixed seed.
TrainResult train_sgd(const Dataset &train, const Architecture &arch, const TrainConfig &config,
                      const Dataset *test = nullptr);

/// Quantizes a trained real network. Layer 0 input scale is 1/255; deeper
/// layers use max activation over `calibration` / 127.
Model quantize_model(const ShadowModel &real, const Dataset &calibration);

} // namespace nnfl
