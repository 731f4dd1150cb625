#pragma once

// Run settings: every key has a config-file name ("section.key"), a CLI flag,
// a type and a default. Config values are applied first, CLI values last.

#include "nnfl/io/toml.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nnfl::io {

enum class SettingType { Int, Double, Bool, String, IntList, DoubleList };

struct SettingDef {
    std::string key;  // "attack.pixels"
    std::string flag; // "--pixels"
    SettingType type;
    TomlValue fallback;
    std::string help;
};

const std::vector<SettingDef> &setting_defs();
const SettingDef &setting_def(std::string_view key);

class Settings {
  public:
    Settings();

    /// Unknown keys and wrongly typed values throw ContractViolation.
    void apply_config(const std::map<std::string, TomlValue> &config);
    /// Parses `text` according to the key's type; lists are comma-separated.
    void apply_text(std::string_view key, std::string_view text);

    std::int64_t integer(std::string_view key) const;
    std::uint64_t unsigned_integer(std::string_view key) const;
    double real(std::string_view key) const;
    bool boolean(std::string_view key) const;
    const std::string &text(std::string_view key) const;
    std::vector<std::int64_t> integers(std::string_view key) const;
    std::vector<double> reals(std::string_view key) const;

    const std::map<std::string, TomlValue, std::less<>> &values() const noexcept { return values_; }

  private:
    const TomlValue &get(std::string_view key) const;
    void set(const SettingDef &def, TomlValue v);

    std::map<std::string, TomlValue, std::less<>> values_;
};

} // namespace nnfl::io
