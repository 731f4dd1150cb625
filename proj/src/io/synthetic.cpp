#include "nnfl/io/synthetic.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/quant.hpp"
#include "nnfl/rng.hpp"

#include <algorithm>

namespace nnfl::io {

Dataset generate_blobs(const BlobConfig &config) {
    require(config.classes >= 2 && config.classes <= 256, "classes must be in [2,256]");
    require(config.dim >= 1, "dim must be >= 1");
    require(config.count >= 1, "count must be >= 1");
    require(config.noise >= 0.0, "noise must be non-negative");

    Rng rng(config.seed);
    std::vector<std::vector<double>> centers(config.classes, std::vector<double>(config.dim));
    for (auto &c : centers)
        for (double &v : c)
            v = 0.15 + 0.7 * uniform01(rng);

    Dataset out;
    out.dim = config.dim;
    out.samples.reserve(config.count);
    for (std::size_t i = 0; i < config.count; ++i) {
        InputImage img;
        img.label = static_cast<int>(i % config.classes);
        img.pixels.resize(config.dim);
        const auto &c = centers[static_cast<std::size_t>(img.label)];
        for (std::size_t j = 0; j < config.dim; ++j) {
            const double v = std::clamp(c[j] + config.noise * normal01(rng), 0.0, 1.0);
            img.pixels[j] = static_cast<std::uint8_t>(round_half_away(v * 255.0));
        }
        out.samples.push_back(std::move(img));
    }
    return out;
}

} // namespace nnfl::io
