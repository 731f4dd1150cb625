#pragma once

// Binary file formats: quantized model, dataset (native and IDX), flash dump.

#include "nnfl/dataset.hpp"
#include "nnfl/memory.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nnfl::io {

inline constexpr std::uint16_t kModelVersion = 1;
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint32_t kFlashVersion = 1;

/// "QNN1", u16 version, u16 layers, u32 input_dim; per layer u32 out, u32 in,
/// f64 w_scale, f64 b_scale, int8 weights, int32 biases; one activation tag
/// byte per layer (0 none, 1 ReLU); CRC32 of everything before it.
std::vector<std::uint8_t> encode_model(const Model &model);
Model decode_model(std::span<const std::uint8_t> bytes);

/// "DSET", u32 count, u32 dim, count*dim pixels, count labels.
std::vector<std::uint8_t> encode_dataset(const Dataset &data);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

/// IDX image file (magic 0x00000803, big-endian count/rows/cols) and label
/// file (0x00000801). Images are flattened row-major.
Dataset decode_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// "FLSH", u32 version, u32 word count, words little-endian. Base address is kFlashBase.
std::vector<std::uint8_t> encode_flash(const FlashImage &flash);
FlashImage decode_flash(std::span<const std::uint8_t> bytes);

} // namespace nnfl::io
