#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nnfl {

/// Raised when a caller breaks an operation's preconditions (dimension
/// mismatch, non-finite values, out-of-range labels).
class ContractViolation : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An address or (region, layer, element) key that the memory map does not
/// resolve.
class MappingError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Malformed file content. `offset` is the byte position where parsing gave up.
class FormatError : public std::runtime_error {
  public:
    FormatError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

inline void require(bool cond, const std::string &msg) {
    if (!cond)
        throw ContractViolation(msg);
}

} // namespace nnfl
