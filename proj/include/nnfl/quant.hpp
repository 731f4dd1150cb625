#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nnfl {

/// Symmetric signed 8-bit quantization, zero point 0. -128 is never produced.
struct QuantScheme {
    static constexpr int bits = 8;
    static constexpr int qmax = 127;
    double scale = 1.0;
};

struct QuantizedValues {
    std::vector<std::int8_t> q;
    double scale = 1.0;
};

/// Rounds to nearest, halfway cases away from zero.
std::int64_t round_half_away(double v);

/// scale = max|v| / 127 (1 when all values are zero).
QuantizedValues quantize(std::span<const double> values);
/// Quantize with a caller-chosen scale; results clamp to [-127, 127].
std::vector<std::int8_t> quantize_with_scale(std::span<const double> values, double scale);
std::vector<double> dequantize(std::span<const std::int8_t> q, double scale);

/// Bias quantization to int32 with the given scale, saturating at the int32 range.
std::int32_t quantize_bias(double value, double scale);

} // namespace nnfl
