#include "nnfl/io/formats.hpp"

#include "nnfl/errors.hpp"
#include "nnfl/io/binary.hpp"

#include <cmath>

namespace nnfl::io {

std::vector<std::uint8_t> encode_model(const Model &model) {
    model.validate();
    ByteWriter w;
    w.tag("QNN1");
    w.u16(kModelVersion);
    w.u16(static_cast<std::uint16_t>(model.layers.size()));
    w.u32(static_cast<std::uint32_t>(model.input_dim));
    for (const auto &l : model.layers) {
        w.u32(static_cast<std::uint32_t>(l.out_dim));
        w.u32(static_cast<std::uint32_t>(l.in_dim));
        w.f64(l.w_scale);
        w.f64(l.b_scale);
        for (auto q : l.weights_q)
            w.u8(static_cast<std::uint8_t>(q));
        for (auto b : l.bias_q)
            w.i32(b);
    }
    for (const auto &l : model.layers)
        w.u8(l.relu ? 1 : 0);
    w.u32(crc32_of(w.bytes()));
    return w.take();
}

Model decode_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_tag("QNN1", "model file");
    const std::size_t version_at = r.offset();
    if (r.u16() != kModelVersion)
        throw FormatError("unsupported model file version", version_at);
    if (bytes.size() < 16)
        throw FormatError("model file truncated", bytes.size());
    const std::size_t crc_at = bytes.size() - 4;
    ByteReader tail(bytes.subspan(crc_at));
    if (tail.u32() != crc32_of(bytes.first(crc_at)))
        throw FormatError("model file CRC mismatch", crc_at);

    Model m;
    const std::uint16_t layers = r.u16();
    m.input_dim = r.u32();
    if (layers == 0)
        throw FormatError("model has no layers", 6);
    for (std::uint16_t i = 0; i < layers; ++i) {
        const std::size_t at = r.offset();
        DenseLayer l;
        l.out_dim = r.u32();
        l.in_dim = r.u32();
        l.w_scale = r.f64();
        l.b_scale = r.f64();
        const std::size_t prev = i == 0 ? m.input_dim : m.layers.back().out_dim;
        if (l.in_dim != prev || l.out_dim == 0)
            throw FormatError("layer dimensions do not chain", at);
        if (!(l.w_scale > 0.0) || !(l.b_scale > 0.0) || !std::isfinite(l.w_scale) || !std::isfinite(l.b_scale))
            throw FormatError("layer scales must be finite and positive", at + 8);
        const std::size_t n = l.out_dim * l.in_dim;
        if (n > r.remaining())
            throw FormatError("weights exceed file size", r.offset());
        for (auto b : r.raw(n))
            l.weights_q.push_back(static_cast<std::int8_t>(b));
        for (std::size_t k = 0; k < l.out_dim; ++k)
            l.bias_q.push_back(r.i32());
        m.layers.push_back(std::move(l));
    }
    for (auto &l : m.layers) {
        const std::size_t at = r.offset();
        const auto tag = r.u8();
        if (tag > 1)
            throw FormatError("unknown activation tag", at);
        l.relu = tag == 1;
    }
    if (r.offset() != crc_at)
        throw FormatError("unexpected bytes before checksum", r.offset());
    try {
        m.validate();
    } catch (const ContractViolation &e) {
        throw FormatError(std::string("invalid model: ") + e.what(), 0);
    }
    return m;
}

std::vector<std::uint8_t> encode_dataset(const Dataset &data) {
    ByteWriter w;
    w.tag("DSET");
    w.u32(static_cast<std::uint32_t>(data.size()));
    w.u32(static_cast<std::uint32_t>(data.dim));
    for (const auto &s : data.samples) {
        require(s.pixels.size() == data.dim, "sample dimension does not match dataset");
        w.raw(s.pixels);
    }
    for (const auto &s : data.samples) {
        require(s.label >= 0 && s.label < 256, "labels must fit in one byte");
        w.u8(static_cast<std::uint8_t>(s.label));
    }
    return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_tag("DSET", "dataset file");
    Dataset d;
    const std::uint32_t count = r.u32();
    d.dim = r.u32();
    if (d.dim == 0)
        throw FormatError("dataset dimension is zero", 8);
    if (static_cast<std::uint64_t>(count) * (d.dim + 1) != r.remaining())
        throw FormatError("dataset size does not match header", r.offset());
    d.samples.resize(count);
    for (auto &s : d.samples) {
        const auto px = r.raw(d.dim);
        s.pixels.assign(px.begin(), px.end());
    }
    for (auto &s : d.samples)
        s.label = r.u8();
    return d;
}

Dataset decode_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
    ByteReader ri(images);
    if (ri.u32_be() != 0x00000803u)
        throw FormatError("IDX image magic must be 0x00000803", 0);
    const std::uint32_t count = ri.u32_be();
    const std::uint32_t rows = ri.u32_be();
    const std::uint32_t cols = ri.u32_be();
    ByteReader rl(labels);
    if (rl.u32_be() != 0x00000801u)
        throw FormatError("IDX label magic must be 0x00000801", 0);
    if (rl.u32_be() != count)
        throw FormatError("IDX label count does not match image count", 4);
    Dataset d;
    d.dim = static_cast<std::size_t>(rows) * cols;
    if (d.dim == 0)
        throw FormatError("IDX image has zero size", 8);
    if (static_cast<std::uint64_t>(count) * d.dim != ri.remaining())
        throw FormatError("IDX image data does not match header", ri.offset());
    if (count != rl.remaining())
        throw FormatError("IDX label data does not match header", rl.offset());
    d.samples.resize(count);
    for (auto &s : d.samples) {
        const auto px = ri.raw(d.dim);
        s.pixels.assign(px.begin(), px.end());
        s.label = rl.u8();
    }
    return d;
}

std::vector<std::uint8_t> encode_flash(const FlashImage &flash) {
    ByteWriter w;
    w.tag("FLSH");
    w.u32(kFlashVersion);
    w.u32(static_cast<std::uint32_t>(flash.word_count()));
    for (auto word : flash.words())
        w.u32(word);
    return w.take();
}

FlashImage decode_flash(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_tag("FLSH", "flash dump");
    if (r.u32() != kFlashVersion)
        throw FormatError("unsupported flash dump version", 4);
    const std::uint32_t n = r.u32();
    if (static_cast<std::uint64_t>(n) * 4 != r.remaining())
        throw FormatError("flash dump size does not match header", r.offset());
    std::vector<std::uint32_t> words(n);
    for (auto &w : words)
        w = r.u32();
    return FlashImage(kFlashBase, std::move(words));
}

} // namespace nnfl::io
