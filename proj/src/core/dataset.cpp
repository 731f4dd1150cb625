#include "nnfl/dataset.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnfl {

std::size_t Dataset::num_classes() const {
    int max_label = -1;
    for (const auto &s : samples)
        max_label = std::max(max_label, s.label);
    return static_cast<std::size_t>(max_label + 1);
}

DatasetSplit split_dataset(const Dataset &data, double test_fraction, std::uint64_t seed) {
    require(test_fraction >= 0.0 && test_fraction < 1.0, "test fraction must be in [0,1)");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle<std::size_t>(order, rng);
    const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(data.size())));
    DatasetSplit out;
    out.train.dim = out.test.dim = data.dim;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto &dst = i < order.size() - n_test ? out.train : out.test;
        dst.samples.push_back(data.samples[order[i]]);
    }
    return out;
}

double accuracy(const Model &model, const Dataset &data) {
    if (data.empty())
        return 0.0;
    DirectReader reader;
    std::size_t correct = 0;
    for (const auto &s : data.samples)
        if (predict(model, s, reader) == static_cast<std::size_t>(s.label))
            ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

} // namespace nnfl
