#pragma once

#include "nnfl/dataset.hpp"

#include <cstddef>
#include <cstdint>

namespace nnfl::io {

struct BlobConfig {
    std::size_t classes = 10;
    std::size_t dim = 64;
    std::size_t count = 1000;
    double noise = 0.35; // std-dev around each class center, in [0,1] pixel units
    std::uint64_t seed = 7;
};

/// Gaussian blobs around uniformly drawn class centers, quantized to 8-bit
/// pixels. Labels cycle 0..classes-1.
Dataset generate_blobs(const BlobConfig &config);

} // namespace nnfl::io
