#include "nnfl/tensor.hpp"

#include "nnfl/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace nnfl {

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    std::size_t n = 1;
    for (std::size_t d : shape_) {
        require(d > 0, "tensor dimensions must be positive");
        n *= d;
    }
    require(n == data_.size(), "tensor shape does not match data length");
    for (double v : data_)
        require(std::isfinite(v), "tensor values must be finite");
}

Tensor Tensor::vector(std::vector<double> data) {
    const std::size_t n = data.size();
    return Tensor({n}, std::move(data));
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

} // namespace nnfl
