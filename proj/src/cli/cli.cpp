#include "nnfl/cli.hpp"

#include "nnfl/attacks/bfa.hpp"
#include "nnfl/attacks/gda.hpp"
#include "nnfl/attacks/input_attack.hpp"
#include "nnfl/attacks/sba.hpp"
#include "nnfl/campaign.hpp"
#include "nnfl/errors.hpp"
#include "nnfl/io/binary.hpp"
#include "nnfl/io/files.hpp"
#include "nnfl/io/formats.hpp"
#include "nnfl/io/reports.hpp"
#include "nnfl/io/settings.hpp"
#include "nnfl/io/synthetic.hpp"
#include "nnfl/rng.hpp"
#include "nnfl/scan.hpp"
#include "nnfl/train.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <list>
#include <set>

namespace nnfl {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr const char *kManifest = "run-manifest.json";

Json to_json(const io::TomlValue &v) {
    return std::visit(
        [](auto &&x) -> Json {
            using X = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<X, io::TomlArray>) {
                Json arr = Json::array();
                for (const auto &s : x)
                    arr.push_back(std::visit([](auto &&y) { return Json(y); }, s));
                return arr;
            } else {
                return Json(x);
            }
        },
        v);
}

/// State of one run: resolved settings, output directory and the artifacts written so far.
class Run {
  public:
    Run(std::string command, io::Settings settings, std::ostream &out)
        : command_(std::move(command)), s(std::move(settings)), out_(out) {
        std::string dir = s.text("output.dir");
        if (dir.empty())
            if (const char *env = std::getenv("NNFL_OUT_DIR"))
                dir = env;
        out_dir_ = dir.empty() ? fs::path(".") : fs::path(dir);
        const auto &fmt = s.text("output.format");
        require(fmt == "csv" || fmt == "json", "--format must be csv or json");
        std::error_code ec;
        fs::create_directories(out_dir_, ec);
        if (ec)
            throw io::IoError("cannot create output directory " + out_dir_.string());
    }

    bool json() const { return s.text("output.format") == "json"; }

    void write(const std::string &name, const std::vector<std::uint8_t> &bytes) {
        io::write_file(out_dir_ / name, bytes);
        outputs_.push_back({{"file", name}, {"bytes", bytes.size()}, {"crc32", io::format_hex32(io::crc32_of(bytes))}});
        out_ << "wrote " << (out_dir_ / name).string() << '\n';
    }

    void write_text(const std::string &name, const std::string &text) {
        write(name, std::vector<std::uint8_t>(text.begin(), text.end()));
    }

    /// `stem` + ".csv" or ".json" depending on --format.
    void write_report(const std::string &stem, const std::function<std::string()> &csv,
                      const std::function<Json()> &js) {
        if (json())
            write_text(stem + ".json", js().dump(2) + "\n");
        else
            write_text(stem + ".csv", csv());
    }

    std::vector<std::uint8_t> read_input(const std::string &path) {
        auto bytes = io::read_file(path);
        inputs_.push_back({{"path", path}, {"crc32", io::format_hex32(io::crc32_of(bytes))}});
        return bytes;
    }

    void finish() {
        Json config = Json::object();
        for (const auto &[k, v] : s.values())
            if (k != "output.dir")
                config[k] = to_json(v);
        Json manifest{{"tool", "nnfl"},
                      {"command", command_},
                      {"config", config},
                      {"seeds",
                       {{"seed", s.integer("seed")},
                        {"split_seed", s.integer("dataset.split_seed")},
                        {"data_seed", s.integer("dataset.seed")}}},
                      {"format_versions",
                       {{"model", io::kModelVersion},
                        {"dataset", io::kDatasetVersion},
                        {"flash", io::kFlashVersion},
                        {"manifest", 1}}},
                      {"inputs", inputs_},
                      {"outputs", outputs_},
                      {"metrics", metrics}};
        io::write_text(out_dir_ / kManifest, manifest.dump(2) + "\n");
        out_ << "wrote " << (out_dir_ / kManifest).string() << '\n';
    }

    std::string command_;
    io::Settings s;
    Json metrics = Json::object();

  private:
    std::ostream &out_;
    fs::path out_dir_;
    Json outputs_ = Json::array();
    Json inputs_ = Json::array();
};

std::size_t to_size(std::int64_t v, const char *what) {
    require(v >= 0, std::string(what) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

io::BlobConfig blob_config(const io::Settings &s, std::uint64_t seed) {
    io::BlobConfig c;
    c.classes = to_size(s.integer("dataset.classes"), "--classes");
    c.dim = to_size(s.integer("dataset.dim"), "--dim");
    c.count = to_size(s.integer("dataset.count"), "--count");
    c.noise = s.real("dataset.noise");
    c.seed = seed;
    return c;
}

Dataset load_dataset(Run &run) {
    const auto &s = run.s;
    const auto &path = s.text("dataset.path");
    if (path.empty())
        return io::generate_blobs(blob_config(s, s.unsigned_integer("dataset.seed")));
    const auto bytes = run.read_input(path);
    if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "DSET"))
        return io::decode_dataset(bytes);
    const auto &labels = s.text("dataset.labels");
    require(!labels.empty(), "IDX image files need --labels");
    return io::decode_idx(bytes, run.read_input(labels));
}

DatasetSplit load_split(Run &run) {
    const auto data = load_dataset(run);
    return split_dataset(data, run.s.real("dataset.test_fraction"), run.s.unsigned_integer("dataset.split_seed"));
}

Model load_model(Run &run) {
    const auto &path = run.s.text("model.path");
    require(!path.empty(), "--model is required");
    Model m = io::decode_model(run.read_input(path));
    const auto &flash_path = run.s.text("model.flash");
    if (!flash_path.empty()) {
        const auto flash = io::decode_flash(run.read_input(flash_path));
        const auto layout = pack_model(m, false);
        if (flash.word_count() != layout.flash.word_count())
            throw FormatError("flash dump does not match the model layout", 8);
        m = unpack_model(flash, layout.map, m);
    }
    return m;
}

void require_dims(const Model &m, const Dataset &d) {
    require(m.input_dim == d.dim, "dataset dimension does not match the model input");
}

std::optional<std::size_t> target_of(const io::Settings &s) {
    const auto t = s.integer("attack.target");
    if (t < 0)
        return std::nullopt;
    return static_cast<std::size_t>(t);
}

SpotBitMapping mapping_of(const io::Settings &s) {
    SpotBitMapping m;
    m.power_threshold_mw = s.real("fault.threshold_mw");
    m.pitch_um = s.real("fault.pitch_um");
    m.x_offset_um = s.real("fault.x_offset_um");
    m.kind = parse_fault_kind(s.text("fault.scan_kind"));
    m.validate();
    return m;
}

/// Correctly classified test images, as (index in split, image).
std::vector<std::pair<std::size_t, InputImage>> eligible_images(const Model &m, const Dataset &test) {
    std::vector<std::pair<std::size_t, InputImage>> out;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (predict(m, test.samples[i]) == static_cast<std::size_t>(test.samples[i].label))
            out.emplace_back(i, test.samples[i]);
    return out;
}

int cmd_gen_data(Run &run) {
    const auto data = io::generate_blobs(blob_config(run.s, run.s.unsigned_integer("seed")));
    run.write("dataset.dset", io::encode_dataset(data));
    run.metrics = {{"count", data.size()}, {"dim", data.dim}, {"classes", data.num_classes()}};
    return kExitOk;
}

int cmd_train(Run &run) {
    const auto split = load_split(run);
    Architecture arch;
    arch.hidden.clear();
    for (auto h : run.s.integers("model.hidden"))
        arch.hidden.push_back(to_size(h, "--hidden"));
    arch.num_classes = std::max(split.train.num_classes(), split.test.num_classes());
    TrainConfig cfg;
    cfg.learning_rate = run.s.real("model.learning_rate");
    cfg.epochs = to_size(run.s.integer("model.epochs"), "--epochs");
    cfg.batch_size = to_size(run.s.integer("model.batch_size"), "--batch-size");
    cfg.seed = run.s.unsigned_integer("seed");
    const auto r = train_sgd(split.train, arch, cfg, &split.test);
    run.write("model.qnn", io::encode_model(r.model));
    run.metrics = {{"train_accuracy", r.train_accuracy},
                   {"test_accuracy", r.test_accuracy},
                   {"parameters", r.model.parameter_count()}};
    run.write_report(
        "train",
        [&] {
            return "train_accuracy,test_accuracy,parameters\n" + io::format_real(r.train_accuracy) + "," +
                   io::format_real(r.test_accuracy) + "," + std::to_string(r.model.parameter_count()) + "\n";
        },
        [&] { return run.metrics; });
    return kExitOk;
}

int cmd_eval(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    std::vector<std::size_t> correct(m.num_classes(), 0), total(m.num_classes(), 0);
    for (const auto &s : split.test.samples) {
        const auto l = static_cast<std::size_t>(s.label);
        require(l < m.num_classes(), "dataset label exceeds model classes");
        ++total[l];
        correct[l] += predict(m, s) == l;
    }
    const double acc = accuracy(m, split.test);
    run.metrics = {{"test_accuracy", acc}, {"samples", split.test.size()}};
    run.write_report(
        "eval",
        [&] {
            std::string csv = "class,samples,correct\n";
            for (std::size_t c = 0; c < total.size(); ++c)
                csv += std::to_string(c) + "," + std::to_string(total[c]) + "," + std::to_string(correct[c]) + "\n";
            return csv;
        },
        [&] {
            Json j = run.metrics;
            j["per_class_samples"] = total;
            j["per_class_correct"] = correct;
            return j;
        });
    return kExitOk;
}

int cmd_pack(Run &run) {
    const Model m = load_model(run);
    const bool in_flash = run.s.boolean("fault.inputs_in_flash");
    std::optional<InputImage> input;
    if (in_flash) {
        const auto split = load_split(run);
        require_dims(m, split.test);
        const auto idx = to_size(run.s.integer("attack.image"), "--image");
        require(idx < split.test.size(), "--image outside the test split");
        input = split.test.samples[idx];
    }
    const auto packed = pack_model(m, in_flash, input ? &*input : nullptr);
    packed.map.check_injective();
    packed.map.check_covers(m);
    run.write("flash.bin", io::encode_flash(packed.flash));
    run.write_report(
        "memory-map", [&] { return io::memory_map_csv(packed.map); }, [&] { return io::memory_map_json(packed.map); });
    run.metrics = {{"words", packed.flash.word_count()},
                   {"base_address", io::format_hex32(packed.flash.base_address())},
                   {"content_hash", io::format_hex32(packed.flash.content_hash())},
                   {"inputs_in_flash", in_flash}};
    return kExitOk;
}

int cmd_scan(Run &run) {
    const auto &s = run.s;
    const auto word = s.integer("fault.word");
    require(word >= 0 && word <= 0xFFFFFFFFll, "--word must fit in 32 bits");
    const FlashImage flash(kFlashBase, {static_cast<std::uint32_t>(word)});
    ScanPlan plan;
    plan.x = {s.real("fault.x_min"), s.real("fault.x_max"), s.real("fault.x_step")};
    plan.y = {s.real("fault.y_min"), s.real("fault.y_max"), s.real("fault.y_step")};
    plan.power_mw = s.real("fault.power_mw");
    const auto mapping = mapping_of(s);
    const bool dbl = s.boolean("fault.double_spot");
    const auto recs = dbl ? double_spot_scan(flash, kFlashBase, mapping, s.real("fault.spot1_x"), plan)
                          : map_scan(flash, kFlashBase, mapping, plan);
    std::set<unsigned> bits;
    std::size_t faulted = 0;
    for (const auto &r : recs) {
        faulted += !r.faulted_bits.empty();
        bits.insert(r.faulted_bits.begin(), r.faulted_bits.end());
    }
    run.write_report("scan", [&] { return io::scan_csv(recs); }, [&] { return io::scan_json(recs); });
    run.metrics = {{"records", recs.size()},
                   {"faulted_records", faulted},
                   {"distinct_bits", bits.size()},
                   {"double_spot", dbl}};
    return kExitOk;
}

int cmd_onebit(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    const auto kind = parse_fault_kind(run.s.text("fault.kind"));
    const auto target = target_of(run.s);
    const auto images = to_size(run.s.integer("attack.images"), "--images");
    const auto k = to_size(run.s.integer("attack.pixels"), "--pixels");
    const bool existence = run.s.boolean("attack.existence");
    DEConfig de;
    de.population = to_size(run.s.integer("attack.population"), "--population");
    de.generations = to_size(run.s.integer("attack.generations"), "--generations");
    de.scale_factor = run.s.real("attack.scale_factor");
    de.validate();

    std::vector<io::OneBitImageRecord> recs;
    for (const auto &[idx, img] : eligible_images(m, split.test)) {
        if (recs.size() == images)
            break;
        if (target && *target == static_cast<std::size_t>(img.label))
            continue;
        de.seed = derive_seed(run.s.unsigned_integer("seed"), idx);
        const auto sel = select_pixels_de(m, img, k, de, target);
        io::OneBitImageRecord rec;
        rec.image = idx;
        rec.pixels = sel.pixels;
        rec.selection_complete = sel.complete;
        rec.de_queries = sel.queries;
        rec.attack = one_bit_attack(m, img, sel.pixels, kind, target);
        if (existence)
            rec.oracle_successes = exhaustive_input_oracle(m, img, kind, target).successes.size();
        recs.push_back(std::move(rec));
    }
    std::optional<ExistenceMetric> metric;
    if (existence && !target)
        metric = sparse_attack_existence(m, split.test.samples, kind);

    std::size_t successes = 0, vulnerable = 0, verified = 0;
    for (const auto &r : recs) {
        successes += r.attack.successes.size();
        vulnerable += !r.attack.successes.empty();
        for (const auto &a : r.attack.successes)
            verified += a.verified;
    }
    run.write_report(
        "onebit", [&] { return io::onebit_csv(recs); },
        [&] { return io::onebit_json(recs, metric ? &*metric : nullptr); });
    run.metrics = {{"images_attacked", recs.size()},
                   {"images_with_success", vulnerable},
                   {"successful_faults", successes},
                   {"verified_faults", verified}};
    if (metric)
        run.metrics["existence"] = {{"eligible", metric->eligible},
                                    {"vulnerable", metric->vulnerable},
                                    {"fraction", metric->fraction()}};
    return successes > 0 ? kExitOk : kExitSoft;
}

int cmd_bfa(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    BFAConfig cfg;
    cfg.max_flips = to_size(run.s.integer("attack.max_flips"), "--max-flips");
    cfg.topk = to_size(run.s.integer("attack.topk"), "--topk");
    cfg.accuracy_threshold = run.s.real("attack.accuracy_threshold");
    auto packed = pack_model(m, false);
    const auto r = bfa(m, packed.flash, packed.map, split.test, cfg);
    run.write_report("bfa", [&] { return io::bfa_csv(r); }, [&] { return io::bfa_json(r); });
    run.write("bfa-flash.bin", io::encode_flash(packed.flash));
    run.write("bfa-model.qnn", io::encode_model(r.attacked));
    run.metrics = {{"status", r.status},
                   {"flips", r.flips.size()},
                   {"accuracy_before", r.accuracy_before},
                   {"accuracy_after", r.accuracy_after}};
    return r.flips.empty() ? kExitSoft : kExitOk;
}

int cmd_sba(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    const auto target = target_of(run.s);
    require(target.has_value(), "attack sba needs --target");
    const auto &mode_text = run.s.text("attack.mode");
    require(mode_text == "output" || mode_text == "hidden", "--mode must be output or hidden");
    const auto r = sba(m, *target, split.test, mode_text == "output" ? SbaMode::OutputLayer : SbaMode::HiddenNeuron);
    bool verified = false;
    if (r.success) {
        const auto replay = replay_faults(m, r.faults(), split.test.samples);
        verified = std::all_of(replay.labels.begin(), replay.labels.end(), [&](std::size_t l) { return l == *target; });
    }
    run.write_report("sba", [&] { return io::sba_csv(r, *target); }, [&] { return io::sba_json(r, *target); });
    run.metrics = {{"status", r.status},
                   {"success", r.success},
                   {"verified", verified},
                   {"new_value", r.change.new_value},
                   {"success_rate", r.success_rate}};
    return r.success ? kExitOk : kExitSoft;
}

int cmd_gda(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    const auto eligible = eligible_images(m, split.test);
    const auto pick = to_size(run.s.integer("attack.image"), "--image");
    require(pick < eligible.size(), "--image exceeds the number of correctly classified test images");
    const auto &[idx, img] = eligible[pick];
    const auto target =
        target_of(run.s).value_or((static_cast<std::size_t>(img.label) + 1) % m.num_classes());
    GDAConfig cfg;
    cfg.learning_rate = run.s.real("attack.learning_rate");
    cfg.steps = to_size(run.s.integer("attack.steps"), "--steps");
    cfg.keep_k = to_size(run.s.integer("attack.keep_k"), "--keep-k");
    cfg.max_keep_k = to_size(run.s.integer("attack.max_keep_k"), "--max-keep-k");
    const auto r = gda(m, img, target, cfg);
    bool verified = false;
    if (r.success)
        verified = replay_faults(m, r.faults(), std::vector<InputImage>{img}).labels.at(0) == target;
    run.write_report(
        "gda", [&] { return io::gda_csv(r); }, [&, idx = idx] { return io::gda_json(r, idx, target, verified); });
    run.metrics = {{"status", r.status},
                   {"success", r.success},
                   {"verified", verified},
                   {"changed_parameters", r.changes.size()},
                   {"keep_k", r.keep_k}};
    return r.success ? kExitOk : kExitSoft;
}

int cmd_campaign_random(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    CampaignSpec spec;
    spec.surface = parse_surface(run.s.text("campaign.surface"));
    spec.kind = parse_fault_kind(run.s.text("fault.kind"));
    spec.persistence = parse_persistence(run.s.text("fault.persistence"));
    spec.trials = to_size(run.s.integer("campaign.trials"), "--trials");
    spec.faults_per_trial = to_size(run.s.integer("campaign.faults_per_trial"), "--faults-per-trial");
    spec.seed = run.s.unsigned_integer("seed");
    if (const auto b = run.s.integer("campaign.bit"); b >= 0)
        spec.bit = static_cast<unsigned>(b);
    const auto packed = pack_model(m, false);
    const auto hash = packed.flash.content_hash();
    const auto rep = random_fault_campaign(m, packed.flash, packed.map, split.test, spec);
    if (run.json()) {
        run.write_text("campaign.json", io::campaign_json(rep).dump(2) + "\n");
    } else {
        run.write_text("campaign.csv", io::campaign_csv(rep));
        run.write_text("campaign-bits.csv", io::campaign_bits_csv(rep));
    }
    run.metrics = {{"baseline_accuracy", rep.baseline_accuracy},
                   {"mean_accuracy", rep.aggregates.mean_accuracy},
                   {"min_accuracy", rep.aggregates.min_accuracy},
                   {"degradation", rep.aggregates.degradation},
                   {"flash_unchanged", packed.flash.content_hash() == hash}};
    return rep.records.empty() ? kExitSoft : kExitOk;
}

int cmd_campaign_disable(Run &run) {
    const Model m = load_model(run);
    const auto split = load_split(run);
    require_dims(m, split.test);
    NeuronDisableSpec spec;
    spec.fractions = run.s.reals("campaign.fractions");
    spec.trials = to_size(run.s.integer("campaign.sweep_trials"), "--sweep-trials");
    spec.seed = run.s.unsigned_integer("seed");
    if (const auto l = run.s.integer("campaign.layer"); l >= 0)
        spec.layer = static_cast<std::size_t>(l);
    const auto c = neuron_disable_sweep(m, split.test, spec);
    run.write_report("neuron-disable", [&] { return io::disable_csv(c); }, [&] { return io::disable_json(c); });
    run.metrics = {{"layer", c.layer}, {"neurons", c.neurons}, {"baseline_error", c.baseline_error}};
    run.metrics["threshold_fraction"] = c.threshold_fraction ? Json(*c.threshold_fraction) : Json(nullptr);
    run.metrics["reference_fraction"] = 0.4;
    return c.records.empty() ? kExitSoft : kExitOk;
}

/// CLI flag bound to a setting key.
struct Binding {
    std::string key;
    CLI::Option *option = nullptr;
    std::string value;
};

void bind_sections(CLI::App *app, std::initializer_list<std::string_view> sections, std::list<Binding> &bindings) {
    for (const auto &def : io::setting_defs()) {
        const auto dot = def.key.find('.');
        const std::string_view section = dot == std::string::npos ? std::string_view{} : std::string_view(def.key).substr(0, dot);
        if (std::find(sections.begin(), sections.end(), section) == sections.end())
            continue;
        auto &b = bindings.emplace_back();
        b.key = def.key;
        b.option = app->add_option(def.flag, b.value, def.help + " [" + def.key + "]");
        if (def.type == io::SettingType::Bool)
            b.option->expected(0, 1);
        b.option->group(section.empty() ? "General" : std::string(section));
    }
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Fault-injection simulator for quantized neural networks"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "TOML run configuration");
    std::list<Binding> bindings;
    bind_sections(&app, {"", "output"}, bindings);

    std::string command;
    std::function<int(Run &)> handler;
    const auto leaf = [&](CLI::App *parent, const std::string &name, const std::string &help,
                          std::initializer_list<std::string_view> sections, std::function<int(Run &)> fn,
                          const std::string &full) {
        auto *sub = parent->add_subcommand(name, help);
        sub->fallthrough();
        bind_sections(sub, sections, bindings);
        sub->callback([&, fn, full] {
            command = full;
            handler = fn;
        });
        return sub;
    };

    leaf(&app, "gen-data", "generate a synthetic blob dataset", {"dataset"}, cmd_gen_data, "gen-data");
    leaf(&app, "train", "train and quantize an MLP", {"model", "dataset"}, cmd_train, "train");
    leaf(&app, "eval", "test-split accuracy of a model (optionally read from a flash dump)", {"model", "dataset"},
         cmd_eval, "eval");
    leaf(&app, "pack", "pack a model into a flash image and emit the memory map", {"model", "dataset", "fault"},
         cmd_pack, "pack");
    leaf(&app, "scan", "simulated laser mapping scan of one flash word", {"fault"}, cmd_scan, "scan");
    auto *attack = app.add_subcommand("attack", "run an attack");
    attack->require_subcommand(1);
    attack->fallthrough();
    const std::initializer_list<std::string_view> attack_sections{"model", "dataset", "attack", "fault"};
    leaf(attack, "onebit", "DE pixel selection and single-bit input faults", attack_sections, cmd_onebit,
         "attack onebit");
    leaf(attack, "bfa", "progressive bit search on stored weights", attack_sections, cmd_bfa, "attack bfa");
    leaf(attack, "sba", "single bias attack", attack_sections, cmd_sba, "attack sba");
    leaf(attack, "gda", "gradient descent attack with compression", attack_sections, cmd_gda, "attack gda");
    auto *campaign = app.add_subcommand("campaign", "run a fault campaign");
    campaign->require_subcommand(1);
    campaign->fallthrough();
    const std::initializer_list<std::string_view> campaign_sections{"model", "dataset", "campaign", "fault"};
    leaf(campaign, "random", "random faults on one surface", campaign_sections, cmd_campaign_random,
         "campaign random");
    leaf(campaign, "neurondisable", "neuron-disable sweep", campaign_sections, cmd_campaign_disable,
         "campaign neurondisable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        io::Settings settings;
        if (!config_path.empty())
            settings.apply_config(io::parse_toml(io::read_text(config_path)));
        for (const auto &b : bindings)
            if (b.option->count() > 0)
                settings.apply_text(b.key, b.value.empty() ? std::string("true") : b.value);
        Run run(command, std::move(settings), out);
        const int code = handler(run);
        run.finish();
        return code;
    } catch (const ContractViolation &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const MappingError &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError &e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const io::IoError &e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace nnfl
