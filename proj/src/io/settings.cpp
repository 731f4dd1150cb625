#include "nnfl/io/settings.hpp"

#include "nnfl/errors.hpp"

#include <algorithm>

namespace nnfl::io {

namespace {

using T = SettingType;

std::vector<SettingDef> make_defs() {
    const TomlArray fractions{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return {
        {"seed", "--seed", T::Int, std::int64_t{1}, "run seed (training, DE, campaigns; blob seed for gen-data)"},

        {"model.path", "--model", T::String, std::string{}, "input model file"},
        {"model.flash", "--flash", T::String, std::string{}, "flash dump holding the model parameters"},
        {"model.hidden", "--hidden", T::IntList, TomlArray{std::int64_t{32}}, "hidden layer widths"},
        {"model.epochs", "--epochs", T::Int, std::int64_t{30}, "training epochs"},
        {"model.learning_rate", "--lr", T::Double, 0.05, "SGD learning rate"},
        {"model.batch_size", "--batch-size", T::Int, std::int64_t{16}, "SGD mini-batch size"},

        {"dataset.path", "--dataset", T::String, std::string{}, "dataset file (DSET or IDX images); synthetic if empty"},
        {"dataset.labels", "--labels", T::String, std::string{}, "IDX label file"},
        {"dataset.test_fraction", "--test-fraction", T::Double, 0.2, "held-out fraction"},
        {"dataset.split_seed", "--split-seed", T::Int, std::int64_t{11}, "train/test split seed"},
        {"dataset.classes", "--classes", T::Int, std::int64_t{10}, "synthetic classes"},
        {"dataset.dim", "--dim", T::Int, std::int64_t{64}, "synthetic input dimension"},
        {"dataset.count", "--count", T::Int, std::int64_t{1000}, "synthetic sample count"},
        {"dataset.noise", "--noise", T::Double, 0.35, "synthetic blob noise"},
        {"dataset.seed", "--data-seed", T::Int, std::int64_t{7}, "synthetic data seed when no dataset file is given"},

        {"fault.kind", "--kind", T::String, std::string{"flip"}, "fault kind: set, reset, flip"},
        {"fault.persistence", "--persistence", T::String, std::string{"transient"}, "transient or permanent"},
        {"fault.inputs_in_flash", "--inputs-in-flash", T::Bool, false, "pack the input after the biases"},
        {"fault.word", "--word", T::Int, std::int64_t{0}, "stored word for scans"},
        {"fault.scan_kind", "--scan-kind", T::String, std::string{"set"}, "fault kind produced by a laser spot"},
        {"fault.power_mw", "--power", T::Double, 200.0, "pulse power in mW"},
        {"fault.threshold_mw", "--threshold", T::Double, 200.0, "minimum power producing a fault"},
        {"fault.pitch_um", "--pitch", T::Double, 1400.0 / 32.0, "bit pitch along X in um"},
        {"fault.x_offset_um", "--x-offset", T::Double, 0.0, "X position of bit 0"},
        {"fault.x_min", "--x-min", T::Double, 0.0, "scan X start"},
        {"fault.x_max", "--x-max", T::Double, 1400.0, "scan X end (inclusive)"},
        {"fault.x_step", "--x-step", T::Double, 5.0, "scan X step"},
        {"fault.y_min", "--y-min", T::Double, 0.0, "scan Y start"},
        {"fault.y_max", "--y-max", T::Double, 550.0, "scan Y end (inclusive)"},
        {"fault.y_step", "--y-step", T::Double, 100.0, "scan Y step"},
        {"fault.double_spot", "--double-spot", T::Bool, false, "sweep a second spot with the first fixed"},
        {"fault.spot1_x", "--spot1-x", T::Double, 0.0, "fixed spot X for double-spot scans"},

        {"attack.images", "--images", T::Int, std::int64_t{50}, "test images attacked"},
        {"attack.pixels", "--pixels", T::Int, std::int64_t{10}, "pixels selected by DE"},
        {"attack.population", "--population", T::Int, std::int64_t{64}, "DE population"},
        {"attack.generations", "--generations", T::Int, std::int64_t{50}, "DE generations"},
        {"attack.scale_factor", "--scale-factor", T::Double, 0.5, "DE scale factor F"},
        {"attack.target", "--target", T::Int, std::int64_t{-1}, "target label, -1 for untargeted"},
        {"attack.existence", "--existence", T::Bool, true, "also run the exhaustive oracle on every image"},
        {"attack.max_flips", "--max-flips", T::Int, std::int64_t{50}, "BFA flip budget"},
        {"attack.topk", "--topk", T::Int, std::int64_t{10}, "BFA candidates per layer"},
        {"attack.accuracy_threshold", "--accuracy-threshold", T::Double, 0.2, "BFA stop accuracy"},
        {"attack.mode", "--mode", T::String, std::string{"output"}, "SBA mode: output or hidden"},
        {"attack.image", "--image", T::Int, std::int64_t{0}, "GDA image index among correctly classified test images"},
        {"attack.learning_rate", "--attack-lr", T::Double, 0.1, "GDA learning rate"},
        {"attack.steps", "--steps", T::Int, std::int64_t{200}, "GDA descent steps"},
        {"attack.keep_k", "--keep-k", T::Int, std::int64_t{1}, "GDA initial kept parameters"},
        {"attack.max_keep_k", "--max-keep-k", T::Int, std::int64_t{0}, "GDA cap on kept parameters, 0 = all"},

        {"campaign.surface", "--surface", T::String, std::string{"weights"}, "weights, biases, inputs, activations"},
        {"campaign.trials", "--trials", T::Int, std::int64_t{100}, "campaign trials"},
        {"campaign.faults_per_trial", "--faults-per-trial", T::Int, std::int64_t{1}, "faults per trial"},
        {"campaign.bit", "--bit", T::Int, std::int64_t{-1}, "fixed bit position, -1 for random"},
        {"campaign.layer", "--layer", T::Int, std::int64_t{-1}, "hidden layer for neuron disabling, -1 for last"},
        {"campaign.fractions", "--fractions", T::DoubleList, fractions, "disabled-neuron fractions"},
        {"campaign.sweep_trials", "--sweep-trials", T::Int, std::int64_t{20}, "trials per fraction"},

        {"output.dir", "--out-dir", T::String, std::string{}, "output directory (NNFL_OUT_DIR if empty)"},
        {"output.format", "--format", T::String, std::string{"csv"}, "report format: csv or json"},
    };
}

bool matches(SettingType t, const TomlValue &v) {
    switch (t) {
    case T::Int:
        return std::holds_alternative<std::int64_t>(v);
    case T::Double:
        return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
    case T::Bool:
        return std::holds_alternative<bool>(v);
    case T::String:
        return std::holds_alternative<std::string>(v);
    case T::IntList:
    case T::DoubleList: {
        const auto *a = std::get_if<TomlArray>(&v);
        if (!a)
            return false;
        return std::all_of(a->begin(), a->end(), [&](const TomlScalar &s) {
            return std::holds_alternative<std::int64_t>(s) ||
                   (t == T::DoubleList && std::holds_alternative<double>(s));
        });
    }
    }
    return false;
}

TomlScalar parse_scalar_text(std::string_view text, std::string_view key) {
    const auto parsed = parse_toml("v = " + std::string(text));
    const auto &v = parsed.at("v");
    if (std::holds_alternative<TomlArray>(v))
        throw ContractViolation("expected a scalar for " + std::string(key));
    return std::visit(
        [](auto &&x) -> TomlScalar {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, TomlArray>)
                return false;
            else
                return x;
        },
        v);
}

} // namespace

const std::vector<SettingDef> &setting_defs() {
    static const std::vector<SettingDef> defs = make_defs();
    return defs;
}

const SettingDef &setting_def(std::string_view key) {
    for (const auto &d : setting_defs())
        if (d.key == key)
            return d;
    throw ContractViolation("unknown setting: " + std::string(key));
}

Settings::Settings() {
    for (const auto &d : setting_defs())
        values_.emplace(d.key, d.fallback);
}

void Settings::set(const SettingDef &def, TomlValue v) {
    if (!matches(def.type, v))
        throw ContractViolation("wrong value type for " + def.key);
    if (def.type == T::Double && std::holds_alternative<std::int64_t>(v))
        v = static_cast<double>(std::get<std::int64_t>(v));
    if (def.type == T::DoubleList)
        for (auto &s : std::get<TomlArray>(v))
            if (std::holds_alternative<std::int64_t>(s))
                s = static_cast<double>(std::get<std::int64_t>(s));
    values_[def.key] = std::move(v);
}

void Settings::apply_config(const std::map<std::string, TomlValue> &config) {
    for (const auto &[key, value] : config) {
        const auto it = std::find_if(setting_defs().begin(), setting_defs().end(),
                                     [&](const SettingDef &d) { return d.key == key; });
        require(it != setting_defs().end(), "unknown config key: " + key);
        set(*it, value);
    }
}

void Settings::apply_text(std::string_view key, std::string_view text) {
    const auto &def = setting_def(key);
    try {
        switch (def.type) {
        case T::String:
            set(def, std::string(text));
            return;
        case T::IntList:
        case T::DoubleList: {
            TomlArray arr;
            std::size_t start = 0;
            while (start <= text.size()) {
                const std::size_t comma = std::min(text.find(',', start), text.size());
                arr.push_back(parse_scalar_text(text.substr(start, comma - start), key));
                start = comma + 1;
            }
            set(def, std::move(arr));
            return;
        }
        default:
            set(def, std::visit([](auto &&x) -> TomlValue { return x; }, parse_scalar_text(text, key)));
        }
    } catch (const FormatError &) {
        throw ContractViolation("invalid value '" + std::string(text) + "' for " + def.flag);
    }
}

const TomlValue &Settings::get(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ContractViolation("unknown setting: " + std::string(key));
    return it->second;
}

std::int64_t Settings::integer(std::string_view key) const { return std::get<std::int64_t>(get(key)); }

std::uint64_t Settings::unsigned_integer(std::string_view key) const {
    const auto v = integer(key);
    require(v >= 0, std::string(key) + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

double Settings::real(std::string_view key) const { return std::get<double>(get(key)); }
bool Settings::boolean(std::string_view key) const { return std::get<bool>(get(key)); }
const std::string &Settings::text(std::string_view key) const { return std::get<std::string>(get(key)); }

std::vector<std::int64_t> Settings::integers(std::string_view key) const {
    std::vector<std::int64_t> out;
    for (const auto &s : std::get<TomlArray>(get(key)))
        out.push_back(std::get<std::int64_t>(s));
    return out;
}

std::vector<double> Settings::reals(std::string_view key) const {
    std::vector<double> out;
    for (const auto &s : std::get<TomlArray>(get(key)))
        out.push_back(std::get<double>(s));
    return out;
}

} // namespace nnfl::io
