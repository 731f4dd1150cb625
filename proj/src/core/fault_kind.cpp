#include "nnfl/fault_kind.hpp"

#include "nnfl/errors.hpp"

namespace nnfl {

std::string_view to_string(FaultKind kind) {
    switch (kind) {
    case FaultKind::BitSet:
        return "BitSet";
    case FaultKind::BitReset:
        return "BitReset";
    case FaultKind::BitFlip:
        return "BitFlip";
    }
    return "?";
}

FaultKind parse_fault_kind(std::string_view text) {
    if (text == "set" || text == "BitSet" || text == "bitset")
        return FaultKind::BitSet;
    if (text == "reset" || text == "BitReset" || text == "bitreset")
        return FaultKind::BitReset;
    if (text == "flip" || text == "BitFlip" || text == "bitflip")
        return FaultKind::BitFlip;
    throw ContractViolation("unknown fault kind '" + std::string(text) + "'");
}

} // namespace nnfl
