// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "nnfl/attacks/bfa.hpp"
#include "nnfl/attacks/common.hpp"
#include "nnfl/attacks/gda.hpp"
#include "nnfl/attacks/input_attack.hpp"
#include "nnfl/attacks/sba.hpp"
#include "nnfl/campaign.hpp"
#include "nnfl/cli.hpp"
#include "nnfl/io/files.hpp"
#include "nnfl/laser.hpp"
#include "nnfl/scan.hpp"
#include "nnfl/shadow.hpp"
#include "toy.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace nnfl;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kFaultModelSeconds = 1.0;
constexpr double kScanSeconds = 1.0;
constexpr double kIntegritySeconds = 5.0;
constexpr double kTrainSeconds = 60.0;
constexpr double kMinTestAccuracy = 0.90;
constexpr double kGradRelTol = 1e-3;
constexpr double kFdStep = 1e-5;
constexpr double kOneBitSeconds = 120.0;
constexpr std::size_t kOneBitImages = 50;
constexpr double kBfaMaxAccuracy = 0.20;
constexpr std::size_t kBfaMaxFlips = 50;
constexpr std::size_t kCampaignTrials = 200;
constexpr std::size_t kGdaMaxChanges = 10;
constexpr double kDisableThreshold = 0.5;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path scratch(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("nnfl_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "nnfl");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::vector<InputImage> correct_images(std::size_t n) {
    std::vector<InputImage> out;
    for (const auto &s : toy::test_set().samples) {
        if (out.size() == n)
            break;
        if (predict(toy::model(), s) == static_cast<std::size_t>(s.label))
            out.push_back(s);
    }
    return out;
}

Outcome fault_model() {
    Stopwatch sw;
    const FlashImage zero(kFlashBase, {0u});
    ReadCounters counters;
    const SpotBitMapping mapping;
    LaserShot shot;
    shot.spots = {{10.0, 0.0}, {17 * mapping.pitch_um + 10.0, 0.0}};
    const auto faults = shot_to_faults(shot, mapping, kFlashBase);
    const std::uint32_t dual = read_word(zero, kFlashBase, faults, counters);
    bool ok = dual == 0x00020001u && zero.stored(kFlashBase) == 0u;

    Rng rng(2024);
    std::size_t mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto word = static_cast<std::uint32_t>(rng());
        const auto bit = static_cast<unsigned>(uniform_index(rng, 32));
        const FlashImage img(kFlashBase, {word});
        const std::uint32_t mask = 1u << bit;
        const std::pair<FaultKind, std::uint32_t> expected[] = {
            {FaultKind::BitSet, word | mask}, {FaultKind::BitReset, word & ~mask}, {FaultKind::BitFlip, word ^ mask}};
        for (const auto &[kind, want] : expected) {
            const FaultSpec f{kind, kFlashBase, bit};
            if (read_word(img, kFlashBase, std::span(&f, 1), counters) != want)
                ++mismatches;
        }
    }
    ok = ok && mismatches == 0;
    const double t = sw.seconds();
    std::ostringstream d;
    d << "double-spot read 0x" << std::hex << std::setw(8) << std::setfill('0') << dual << std::dec << ", " << mismatches
      << " mismatches over 30000 masked reads, " << t << " s";
    return {ok && t < kFaultModelSeconds, d.str()};
}

Outcome scan_reproduction() {
    Stopwatch sw;
    const FlashImage zero(kFlashBase, {0u});
    const ScanPlan plan;
    const auto recs = map_scan(zero, kFlashBase, SpotBitMapping{}, plan);
    const std::size_t nx = plan.x.count(), ny = plan.y.count();
    bool ok = recs.size() == nx * ny;
    std::set<unsigned> seen;
    for (std::size_t j = 0; ok && j < ny; ++j) {
        int prev = -1;
        for (std::size_t i = 0; i < nx; ++i) {
            const auto &r = recs[j * nx + i];
            if (r.faulted_bits.size() != 1 || r.faulted_bits != recs[i].faulted_bits ||
                static_cast<int>(r.faulted_bits[0]) < prev) {
                ok = false;
                break;
            }
            prev = static_cast<int>(r.faulted_bits[0]);
            seen.insert(r.faulted_bits[0]);
        }
    }
    ok = ok && seen.size() == 32;
    ScanPlan low = plan;
    low.power_mw = 199.0;
    std::size_t low_faults = 0;
    for (const auto &r : map_scan(zero, kFlashBase, SpotBitMapping{}, low))
        low_faults += r.faulted_bits.size() + (r.read != 0u);
    const double t = sw.seconds();
    std::ostringstream d;
    d << recs.size() << " records, " << seen.size() << " distinct bits, " << low_faults
      << " faults at 199 mW, " << t << " s";
    return {ok && low_faults == 0 && t < kScanSeconds, d.str()};
}

Outcome storage_integrity() {
    Stopwatch sw;
    const auto packed = pack_model(toy::model(), false);
    const auto hash = packed.flash.content_hash();
    const auto copy = packed.flash;
    Rng rng(3);
    ReadCounters counters;
    std::uint64_t sink = 0;
    for (int i = 0; i < 100000; ++i) {
        const auto addr = packed.flash.address_of(uniform_index(rng, packed.flash.word_count()));
        const FaultSpec f{static_cast<FaultKind>(uniform_index(rng, 3)), addr, static_cast<unsigned>(uniform_index(rng, 32))};
        sink += read_word(packed.flash, addr, std::span(&f, 1), counters);
    }
    bool ok = packed.flash.content_hash() == hash && packed.flash == copy;
    for (Surface s : {Surface::Weights, Surface::Biases, Surface::Inputs, Surface::Activations}) {
        CampaignSpec spec;
        spec.surface = s;
        spec.trials = 10;
        spec.faults_per_trial = 4;
        random_fault_campaign(toy::model(), packed.flash, packed.map, toy::test_set(), spec);
        ok = ok && packed.flash.content_hash() == hash;
    }
    const double t = sw.seconds();
    std::ostringstream d;
    d << "hash 0x" << std::hex << hash << std::dec << " unchanged=" << (ok ? "yes" : "no") << " after 1e5 reads and "
      << "4 transient campaigns (checksum " << (sink & 0xFF) << "), " << t << " s";
    return {ok && t < kIntegritySeconds, d.str()};
}

// Plain-loop loss on the shadow arrays.
double naive_loss(const ShadowModel &m, const std::vector<double> &x, std::size_t label) {
    std::vector<double> a = x;
    for (const auto &l : m.layers) {
        std::vector<double> z(l.out_dim);
        for (std::size_t o = 0; o < l.out_dim; ++o) {
            double s = l.biases[o];
            for (std::size_t i = 0; i < l.in_dim; ++i)
                s += l.weights[o * l.in_dim + i] * a[i];
            z[o] = l.relu ? std::max(0.0, s) : s;
        }
        a = z;
    }
    double denom = 0.0;
    for (double z : a)
        denom += std::exp(z);
    return -std::log(std::exp(a[label]) / denom);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Outcome training_and_gradients() {
    // Timed from scratch; the cached toy setup may already exist.
    Stopwatch sw;
    TrainConfig cfg;
    cfg.seed = toy::kTrainSeed;
    const auto trained = train_sgd(toy::train_set(), Architecture{}, cfg, &toy::test_set());
    const double train_s = sw.seconds();

    Rng rng(77);
    double worst = 0.0;
    for (int net = 0; net < 20; ++net) {
        const std::size_t d = 3 + uniform_index(rng, 4);
        const std::size_t classes = 2 + uniform_index(rng, 3);
        std::vector<std::size_t> dims{d, 2 + uniform_index(rng, 5)};
        if (net % 2 == 1)
            dims.push_back(2 + uniform_index(rng, 4));
        dims.push_back(classes);
        ShadowModel m = to_shadow(toy::random_model(dims, rng));
        std::vector<double> x(d);
        for (double &v : x)
            v = uniform01(rng);
        const std::size_t y = uniform_index(rng, classes);
        const auto g = backward(m, x, y);
        const auto central = [&](double &param) {
            const double orig = param;
            param = orig + kFdStep;
            const double up = naive_loss(m, x, y);
            param = orig - kFdStep;
            const double down = naive_loss(m, x, y);
            param = orig;
            return (up - down) / (2 * kFdStep);
        };
        for (std::size_t li = 0; li < m.layers.size(); ++li) {
            for (std::size_t k = 0; k < m.layers[li].weights.size(); ++k)
                worst = std::max(worst, rel_err(central(m.layers[li].weights[k]), g.weights[li][k]));
            for (std::size_t k = 0; k < m.layers[li].biases.size(); ++k)
                worst = std::max(worst, rel_err(central(m.layers[li].biases[k]), g.biases[li][k]));
        }
        for (std::size_t i = 0; i < d; ++i)
            worst = std::max(worst, rel_err(central(x[i]), g.input[i]));
    }
    std::ostringstream d;
    d << "test accuracy " << trained.test_accuracy << " in " << train_s << " s, worst gradient relative error "
      << worst << " over 20 nets";
    return {trained.test_accuracy >= kMinTestAccuracy && train_s < kTrainSeconds && worst <= kGradRelTol, d.str()};
}

Outcome onebit_soundness() {
    Stopwatch sw;
    const auto images = correct_images(kOneBitImages);
    bool ok = images.size() == kOneBitImages;
    std::size_t successes = 0, verified = 0, equal_sets = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto &img = images[i];
        DEConfig cfg;
        cfg.seed = derive_seed(1, i);
        const auto sel = select_pixels_de(toy::model(), img, 10, cfg);
        const auto attack = one_bit_attack(toy::model(), img, sel.pixels, FaultKind::BitFlip);
        const auto oracle = exhaustive_input_oracle(toy::model(), img, FaultKind::BitFlip);
        const std::set<std::size_t> chosen(sel.pixels.begin(), sel.pixels.end());
        std::set<PixelBitFault> restricted;
        for (const auto &f : oracle.faults())
            if (chosen.contains(f.pixel))
                restricted.insert(f);
        const auto found = attack.faults();
        if (std::set<PixelBitFault>(found.begin(), found.end()) == restricted)
            ++equal_sets;
        for (const auto &s : attack.successes) {
            ++successes;
            // Independent re-check through packed flash and faulted reads.
            const auto replay = replay_faults(toy::model(), s.faults, std::vector<InputImage>{img});
            if (verify_attack(toy::model(), s, img).verified && replay.labels[0] == s.label_after &&
                s.label_after != static_cast<std::size_t>(img.label))
                ++verified;
        }
    }
    const double t = sw.seconds();
    ok = ok && verified == successes && equal_sets == images.size() && t < kOneBitSeconds;
    std::ostringstream d;
    d << images.size() << " images, " << successes << " reported faults, " << verified << " verified, " << equal_sets
      << " oracle-equal pixel sets, " << t << " s";
    return {ok, d.str()};
}

Outcome existence_metric(const fs::path &model, const fs::path &dataset) {
    const auto dir = scratch("existence");
    const int code = cli({"attack", "onebit", "--model", model.string(), "--dataset", dataset.string(), "--images",
                          "5", "--out-dir", dir.string()});
    const auto manifest = nlohmann::json::parse(io::read_text(dir / "run-manifest.json"));
    const auto &reported = manifest["metrics"]["existence"];
    const auto expected = sparse_attack_existence(toy::model(), toy::test_set().samples, FaultKind::BitFlip);
    const bool ok = (code == kExitOk || code == kExitSoft) && reported.is_object() &&
                    reported["fraction"].get<double>() == expected.fraction() &&
                    reported["eligible"].get<std::size_t>() == expected.eligible;
    std::ostringstream d;
    d << "existence fraction " << expected.fraction() << " (" << expected.vulnerable << "/" << expected.eligible
      << " correctly classified test images), present in run manifest";
    return {ok, d.str()};
}

Outcome bfa_desk_scale() {
    auto packed = pack_model(toy::model(), false);
    BFAConfig cfg;
    cfg.max_flips = kBfaMaxFlips;
    cfg.accuracy_threshold = kBfaMaxAccuracy;
    const auto r = bfa(toy::model(), packed.flash, packed.map, toy::test_set(), cfg);
    bool increasing = true;
    for (std::size_t i = 0; i < r.flips.size(); ++i) {
        increasing = increasing && r.flips[i].loss_after > r.flips[i].loss_before;
        if (i > 0)
            increasing = increasing && r.flips[i].loss_after > r.flips[i - 1].loss_after;
    }
    // Accuracy re-measured from the attacked flash, independent of the value the attack reports.
    const double measured = accuracy(unpack_model(packed.flash, packed.map, toy::model()), toy::test_set());

    const auto clean = pack_model(toy::model(), false);
    auto spec = [](unsigned bit) {
        CampaignSpec s;
        s.surface = Surface::Weights;
        s.kind = FaultKind::BitFlip;
        s.trials = kCampaignTrials;
        s.seed = 99;
        s.bit = bit;
        return s;
    };
    const auto msb = random_fault_campaign(toy::model(), clean.flash, clean.map, toy::test_set(), spec(7));
    const auto lsb = random_fault_campaign(toy::model(), clean.flash, clean.map, toy::test_set(), spec(0));
    const bool ok = r.accuracy_before >= kMinTestAccuracy && measured <= kBfaMaxAccuracy &&
                    r.flips.size() <= kBfaMaxFlips && increasing &&
                    msb.aggregates.degradation >= lsb.aggregates.degradation;
    std::ostringstream d;
    d << "accuracy " << r.accuracy_before << " -> " << measured << " in " << r.flips.size()
      << " flips, loss strictly increasing=" << (increasing ? "yes" : "no") << "; mean drop MSB "
      << msb.aggregates.degradation << " vs LSB " << lsb.aggregates.degradation << " over " << kCampaignTrials
      << " trials each";
    return {ok, d.str()};
}

Outcome sba_check() {
    const auto &m = toy::model();
    const auto &eval = toy::test_set();
    const std::size_t last = m.layers.size() - 1;
    std::size_t dominant = 0, certified = 0;
    std::ostringstream values;
    for (std::size_t t = 0; t < m.num_classes(); ++t) {
        if (sba_success_rate(m, last, t, INT32_MAX, t, eval) == 1.0)
            ++dominant;
        const auto r = sba(m, t, eval);
        if (r.success && sba_success_rate(m, last, t, r.change.new_value, t, eval) == 1.0 &&
            sba_success_rate(m, last, t, r.change.new_value / 2, t, eval) < 1.0)
            ++certified;
        values << (t ? "," : "") << r.change.new_value;
    }
    std::ostringstream d;
    d << dominant << "/10 targets at INT32_MAX give 100%, " << certified
      << "/10 minimal values certified by halving; values " << values.str();
    return {dominant == m.num_classes() && certified == m.num_classes(), d.str()};
}

Outcome gda_check() {
    const auto img = correct_images(1).at(0);
    const std::size_t target = (static_cast<std::size_t>(img.label) + 1) % toy::model().num_classes();
    const auto r = gda(toy::model(), img, target, GDAConfig{});
    const auto replay = replay_faults(toy::model(), r.faults(), std::vector<InputImage>{img});
    const bool ok = r.success && r.changes.size() <= kGdaMaxChanges && replay.labels[0] == target;
    std::ostringstream d;
    d << "label " << img.label << " -> target " << target << " with " << r.changes.size()
      << " changed stored parameters, replayed label " << replay.labels[0];
    return {ok, d.str()};
}

Outcome neuron_disable(const fs::path &model, const fs::path &dataset) {
    NeuronDisableSpec spec;
    const auto c = neuron_disable_sweep(toy::model(), toy::test_set(), spec);
    const bool f0 = std::abs(c.points.front().mean_misclassification - c.baseline_error) <= 1e-12;
    std::vector<ActivationFault> all;
    for (std::size_t n = 0; n < c.neurons; ++n)
        all.push_back({c.layer, n, std::nullopt});
    DirectReader reader;
    std::set<std::size_t> labels;
    for (const auto &s : toy::test_set().samples)
        labels.insert(predict(toy::model(), s, reader, all));

    const auto dir = scratch("disable");
    const int code = cli({"campaign", "neurondisable", "--model", model.string(), "--dataset", dataset.string(),
                          "--format", "json", "--out-dir", dir.string()});
    const auto j = nlohmann::json::parse(io::read_text(dir / "neuron-disable.json"));
    const bool emitted = code == kExitOk && j["points"].size() == spec.fractions.size() &&
                         j.contains("threshold_fraction");
    bool threshold_ok = true;
    if (c.threshold_fraction) {
        const auto it = std::find_if(c.points.begin(), c.points.end(), [](const DisablePoint &p) {
            return p.mean_misclassification >= kDisableThreshold;
        });
        threshold_ok = it != c.points.end() && it->fraction == *c.threshold_fraction;
    }
    std::ostringstream d;
    d << "f=0 error " << c.points.front().mean_misclassification << " vs baseline " << c.baseline_error
      << ", f=1 distinct labels " << labels.size() << ", threshold fraction "
      << (c.threshold_fraction ? std::to_string(*c.threshold_fraction) : std::string("none"))
      << " (comparison value 0.4)";
    return {f0 && labels.size() == 1 && emitted && threshold_ok, d.str()};
}

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path &dir) {
    std::map<std::string, std::vector<std::uint8_t>> files;
    for (const auto &e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return files;
}

Outcome determinism(const fs::path &model, const fs::path &dataset) {
    const std::vector<std::vector<std::string>> commands = {
        {"gen-data", "--seed", "7"},
        {"train", "--dataset", dataset.string(), "--seed", "1"},
        {"eval", "--model", model.string(), "--dataset", dataset.string()},
        {"pack", "--model", model.string(), "--format", "json"},
        {"scan"},
        {"scan", "--double-spot", "--format", "json"},
        {"attack", "onebit", "--model", model.string(), "--dataset", dataset.string(), "--images", "10"},
        {"attack", "bfa", "--model", model.string(), "--dataset", dataset.string()},
        {"attack", "sba", "--model", model.string(), "--dataset", dataset.string(), "--target", "3"},
        {"attack", "gda", "--model", model.string(), "--dataset", dataset.string(), "--format", "json"},
        {"campaign", "random", "--model", model.string(), "--dataset", dataset.string(), "--trials", "50"},
        {"campaign", "neurondisable", "--model", model.string(), "--dataset", dataset.string(), "--sweep-trials", "5"},
    };
    std::size_t identical = 0;
    std::string first_bad;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::array<std::map<std::string, std::vector<std::uint8_t>>, 2> runs;
        std::array<int, 2> codes{};
        for (int k = 0; k < 2; ++k) {
            const auto dir = scratch("det_" + std::to_string(i) + "_" + std::to_string(k));
            auto args = commands[i];
            args.push_back("--out-dir");
            args.push_back(dir.string());
            codes[k] = cli(args);
            runs[k] = snapshot(dir);
        }
        if (codes[0] == codes[1] && codes[0] != kExitUsage && codes[0] != kExitIo && runs[0].size() >= 2 &&
            runs[0] == runs[1])
            ++identical;
        else if (first_bad.empty())
            first_bad = commands[i][0] + (commands[i].size() > 1 ? " " + commands[i][1] : "");
    }
    std::ostringstream d;
    d << identical << "/" << commands.size() << " subcommand runs byte-identical";
    if (!first_bad.empty())
        d << ", first difference in " << first_bad;
    return {identical == commands.size(), d.str()};
}

} // namespace

int main() {
    // Shared inputs for the criteria that drive the command line.
    const auto fixture = scratch("fixture");
    cli({"gen-data", "--seed", "7", "--out-dir", fixture.string()});
    const auto dataset = fixture / "dataset.dset";
    cli({"train", "--dataset", dataset.string(), "--seed", "1", "--out-dir", fixture.string()});
    const auto model = fixture / "model.qnn";

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"fault-model exactness", fault_model},
        {"scan reproduction", scan_reproduction},
        {"storage integrity", storage_integrity},
        {"training and gradients", training_and_gradients},
        {"one-bit attack soundness and completeness", onebit_soundness},
        {"sparse-attack existence metric", [&] { return existence_metric(model, dataset); }},
        {"BFA desk scale", bfa_desk_scale},
        {"SBA", sba_check},
        {"GDA", gda_check},
        {"neuron-disable sweep", [&] { return neuron_disable(model, dataset); }},
        {"determinism", [&] { return determinism(model, dataset); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << " " << criteria[i].first << ": " << (o.pass ? "PASS" : "FAIL") << " ("
                  << o.detail << ")" << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
