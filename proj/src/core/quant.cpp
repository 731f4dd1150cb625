#include "nnfl/quant.hpp"

#include "nnfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nnfl {

std::int64_t round_half_away(double v) {
    return static_cast<std::int64_t>(v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

std::vector<std::int8_t> quantize_with_scale(std::span<const double> values, double scale) {
    require(scale > 0.0 && std::isfinite(scale), "quantization scale must be positive");
    std::vector<std::int8_t> q(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(std::isfinite(values[i]), "cannot quantize non-finite value");
        const double r = std::clamp(values[i] / scale, -1.0e9, 1.0e9);
        q[i] = static_cast<std::int8_t>(std::clamp<std::int64_t>(round_half_away(r), -QuantScheme::qmax,
                                                                 QuantScheme::qmax));
    }
    return q;
}

QuantizedValues quantize(std::span<const double> values) {
    double max_abs = 0.0;
    for (double v : values) {
        require(std::isfinite(v), "cannot quantize non-finite value");
        max_abs = std::max(max_abs, std::abs(v));
    }
    QuantizedValues out;
    out.scale = max_abs > 0.0 ? max_abs / QuantScheme::qmax : 1.0;
    out.q = quantize_with_scale(values, out.scale);
    return out;
}

std::vector<double> dequantize(std::span<const std::int8_t> q, double scale) {
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        out[i] = scale * static_cast<double>(q[i]);
    return out;
}

std::int32_t quantize_bias(double value, double scale) {
    require(scale > 0.0 && std::isfinite(scale), "bias scale must be positive");
    require(std::isfinite(value), "cannot quantize non-finite bias");
    constexpr double lo = std::numeric_limits<std::int32_t>::min();
    constexpr double hi = std::numeric_limits<std::int32_t>::max();
    const double r = std::clamp(value / scale, lo, hi);
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(round_half_away(r), static_cast<std::int64_t>(lo),
                                                              static_cast<std::int64_t>(hi)));
}

} // namespace nnfl
