#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nnfl {

enum class FaultKind : std::uint8_t { BitSet, BitReset, BitFlip };

template <typename Word>
constexpr Word apply_fault(Word value, FaultKind kind, unsigned bit) {
    const Word mask = static_cast<Word>(Word{1} << bit);
    switch (kind) {
    case FaultKind::BitSet:
        return static_cast<Word>(value | mask);
    case FaultKind::BitReset:
        return static_cast<Word>(value & static_cast<Word>(~mask));
    case FaultKind::BitFlip:
        return static_cast<Word>(value ^ mask);
    }
    return value;
}

std::string_view to_string(FaultKind kind);
/// Accepts "set", "reset", "flip" and the enumerator spellings.
FaultKind parse_fault_kind(std::string_view text);

} // namespace nnfl
