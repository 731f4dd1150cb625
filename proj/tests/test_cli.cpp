#include "doctest.h"

#include "nnfl/cli.hpp"
#include "nnfl/io/files.hpp"
#include "nnfl/io/formats.hpp"
#include "toy.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace nnfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("nnfl_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(std::vector<std::string> args, std::string *err_text = nullptr) {
    args.insert(args.begin(), "nnfl");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text)
        *err_text = err.str();
    return code;
}

/// Generated dataset and trained model shared by the tests below.
struct Fixture {
    fs::path dir;
    std::string dataset;
    std::string model;
};

const Fixture &fixture() {
    static const Fixture f = [] {
        Fixture x;
        x.dir = scratch("fixture");
        REQUIRE(run({"gen-data", "--classes", "10", "--dim", "64", "--count", "1000", "--seed", "7", "--out-dir",
                     x.dir.string()}) == 0);
        x.dataset = (x.dir / "dataset.dset").string();
        REQUIRE(run({"train", "--dataset", x.dataset, "--seed", "1", "--out-dir", x.dir.string()}) == 0);
        x.model = (x.dir / "model.qnn").string();
        return x;
    }();
    return f;
}

nlohmann::json load_json(const fs::path &p) { return nlohmann::json::parse(io::read_text(p)); }

} // namespace

TEST_CASE("gen-data twice gives byte-identical files") {
    const auto a = scratch("gen_a");
    const auto b = scratch("gen_b");
    for (const auto &d : {a, b})
        CHECK(run({"gen-data", "--classes", "10", "--dim", "64", "--count", "1000", "--seed", "7", "--out-dir",
                   d.string()}) == 0);
    CHECK(io::read_file(a / "dataset.dset") == io::read_file(b / "dataset.dset"));
    CHECK(io::read_file(a / "run-manifest.json") == io::read_file(b / "run-manifest.json"));
}

TEST_CASE("CLI training reproduces the library toy model bit for bit") {
    const auto m = io::decode_model(io::read_file(fixture().model));
    CHECK(m == toy::model());
    const auto manifest = load_json(fixture().dir / "run-manifest.json");
    CHECK(manifest["command"] == "train");
    CHECK(manifest["metrics"]["test_accuracy"].get<double>() >= 0.9);
    CHECK(manifest["outputs"].size() == 2);
    CHECK(!manifest.contains("timestamp"));
}

TEST_CASE("scan below threshold yields no faulted record") {
    const auto d = scratch("scan199");
    CHECK(run({"scan", "--word", "0x00000000", "--power", "199", "--out-dir", d.string()}) == 0);
    const auto csv = io::read_text(d / "scan.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x_um,y_um,power_mw,read_hex,faulted_bits");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.back() == ',');
        CHECK(line.find("0x00000000") != std::string::npos);
    }
    CHECK(rows == 281 * 6);
}

TEST_CASE("attack onebit JSON results all pass verification") {
    const auto d = scratch("onebit");
    const int code = run({"attack", "onebit", "--model", fixture().model, "--dataset", fixture().dataset, "--images",
                          "20", "--format", "json", "--out-dir", d.string()});
    CHECK((code == kExitOk || code == kExitSoft));
    const auto j = load_json(d / "onebit.json");
    CHECK(j["images"].size() == 20);
    for (const auto &img : j["images"]) {
        CHECK(img["pixels"].size() == 10);
        for (const auto &s : img["successes"]) {
            CHECK(s["verified"] == true);
            CHECK(s["label_after"] != s["label_before"]);
        }
    }
    CHECK(j.contains("existence"));
    const auto m = load_json(d / "run-manifest.json");
    CHECK(m["metrics"]["existence"]["fraction"].is_number());
}

TEST_CASE("exit codes") {
    const auto d = scratch("codes");
    std::string err;
    CHECK(run({}, &err) == kExitUsage);
    CHECK(run({"train", "--no-such-flag"}, &err) == kExitUsage);
    CHECK(run({"attack"}, &err) == kExitUsage);
    CHECK(run({"attack", "sba", "--model", fixture().model, "--out-dir", d.string()}, &err) == kExitUsage);
    CHECK(err.find("--target") != std::string::npos);
    CHECK(run({"eval", "--model", (d / "missing.qnn").string(), "--out-dir", d.string()}, &err) == kExitIo);

    auto bytes = io::read_file(fixture().model);
    bytes.resize(bytes.size() / 2);
    io::write_file(d / "truncated.qnn", bytes);
    CHECK(run({"eval", "--model", (d / "truncated.qnn").string(), "--out-dir", d.string()}, &err) == kExitIo);
    CHECK(err.find("offset") != std::string::npos);

    io::write_text(d / "bad.toml", "[attack]\nunknown_key = 1\n");
    CHECK(run({"scan", "--config", (d / "bad.toml").string(), "--out-dir", d.string()}, &err) == kExitUsage);
    CHECK(run({"scan", "--format", "xml", "--out-dir", d.string()}, &err) == kExitUsage);
    // no misclassification possible: GDA with zero steps
    CHECK(run({"attack", "gda", "--model", fixture().model, "--dataset", fixture().dataset, "--steps", "0",
               "--out-dir", d.string()}) == kExitSoft);
}

TEST_CASE("config file values apply and CLI flags override them") {
    const auto d = scratch("config");
    io::write_text(d / "run.toml", "seed = 5\n[fault]\npower_mw = 150\nx_max = 100\n[output]\nformat = \"json\"\n");
    CHECK(run({"scan", "--config", (d / "run.toml").string(), "--x-max", "50", "--out-dir", d.string()}) == 0);
    const auto scan = load_json(d / "scan.json");
    CHECK(scan.size() == 11 * 6);
    CHECK(scan[0]["power_mw"] == 150.0);
    CHECK(scan[0]["faulted_bits"].empty());
    const auto manifest = load_json(d / "run-manifest.json");
    CHECK(manifest["config"]["seed"] == 5);
    CHECK(manifest["config"]["fault.x_max"] == 50.0);
}

TEST_CASE("NNFL_OUT_DIR is the fallback output directory") {
    const auto d = scratch("envdir");
    ::setenv("NNFL_OUT_DIR", d.string().c_str(), 1);
    CHECK(run({"scan", "--x-max", "10"}) == 0);
    ::unsetenv("NNFL_OUT_DIR");
    CHECK(fs::exists(d / "scan.csv"));
    CHECK(fs::exists(d / "run-manifest.json"));
}

TEST_CASE("shipped toy data regenerates byte for byte") {
    const fs::path shipped(NNFL_DATA_DIR);
    CHECK(io::read_file(shipped / "toy.dset") == io::read_file(fixture().dataset));
    CHECK(io::read_file(shipped / "toy.qnn") == io::read_file(fixture().model));
}

TEST_CASE("attack onebit on the shipped toy files verifies every result") {
    const fs::path shipped(NNFL_DATA_DIR);
    const auto d = scratch("shipped");
    const int code = run({"attack", "onebit", "--model", (shipped / "toy.qnn").string(), "--dataset",
                          (shipped / "toy.dset").string(), "--format", "json", "--out-dir", d.string()});
    CHECK(code == kExitOk);
    const auto j = load_json(d / "onebit.json");
    std::size_t successes = 0;
    for (const auto &img : j["images"])
        for (const auto &s : img["successes"]) {
            ++successes;
            CHECK(s["verified"] == true);
        }
    CHECK(successes > 0);
}
