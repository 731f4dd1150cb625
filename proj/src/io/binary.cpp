#include "nnfl/io/binary.hpp"

#include "nnfl/errors.hpp"

#include <bit>
#include <cstring>
#include <string>
#include <zlib.h>

namespace nnfl::io {

void ByteWriter::u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8)
        u8(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8)
        u8(static_cast<std::uint8_t>(bits >> s));
}

void ByteWriter::tag(std::string_view magic) {
    for (char c : magic)
        u8(static_cast<std::uint8_t>(c));
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n)
        throw FormatError("unexpected end of data", pos_);
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(data_[pos_] | data_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = v << 8 | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
}

std::uint32_t ByteReader::u32_be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v = v << 8 | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
}

double ByteReader::f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i)
        bits = bits << 8 | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return std::bit_cast<double>(bits);
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
}

void ByteReader::expect_tag(std::string_view magic, std::string_view what) {
    const std::size_t at = pos_;
    need(magic.size());
    if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0)
        throw FormatError("bad magic for " + std::string(what), at);
    pos_ += magic.size();
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    return static_cast<std::uint32_t>(crc);
}

} // namespace nnfl::io
