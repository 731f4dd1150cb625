#pragma once

// Subset of TOML: [table] headers, key = value, strings, integers (decimal or
// 0x hex, '_' separators), floats, booleans, single-line arrays of scalars,
// and # comments. Keys are returned as "table.key".

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nnfl::io {

using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlArray = std::vector<TomlScalar>;
using TomlValue = std::variant<bool, std::int64_t, double, std::string, TomlArray>;

/// Throws FormatError with the byte offset of the offending token.
std::map<std::string, TomlValue> parse_toml(std::string_view text);

} // namespace nnfl::io
