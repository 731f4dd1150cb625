#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nnfl {

/// Dense row-major tensor of doubles. All values are finite.
class Tensor {
  public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor vector(std::vector<double> data);

    const std::vector<std::size_t> &shape() const noexcept { return shape_; }
    std::span<const double> data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }
    double operator[](std::size_t i) const { return data_[i]; }

    bool operator==(const Tensor &) const = default;

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

} // namespace nnfl
