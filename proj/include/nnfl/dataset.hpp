#pragma once

#include "nnfl/model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nnfl {

struct Dataset {
    std::size_t dim = 0;
    std::vector<InputImage> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    /// max label + 1.
    std::size_t num_classes() const;
};

struct DatasetSplit {
    Dataset train;
    Dataset test;
};

/// Deterministic shuffle-and-split; the last `test_fraction` goes to test.
DatasetSplit split_dataset(const Dataset &data, double test_fraction, std::uint64_t seed);

/// Fraction of samples predicted correctly through a DirectReader.
double accuracy(const Model &model, const Dataset &data);

} // namespace nnfl
