#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// Runs the CLI with stderr folded into stdout so error lines are capturable.
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SSW_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.output += buf.data();
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("clitest_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const std::string& rel) const { return (path / rel).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

// One generated dataset shared by the pipeline cases; regenerating per case
// would triple the suite's runtime for no extra coverage.
struct Fixture {
    TempDir dir;
    std::string graph, walks;
    Fixture() {
        const std::string data = dir.str("data");
        RunResult r = run_cli("synth --out " + data +
                              " --accounts 160 --phishing 4 --scams 4 --seed 3");
        REQUIRE(r.exit_code == 0);
        graph = dir.str("net.ssgr");
        r = run_cli("ingest --tx " + data + "/transactions.csv --labels " + data +
                    "/labels.csv --out " + graph);
        REQUIRE(r.exit_code == 0);
        walks = dir.str("walks.jsonl");
        r = run_cli("sample --graph " + graph + " --out " + walks +
                    " --seed 3 --structural-window 5 --max-walk-len 12 --max-intervals 8");
        REQUIRE(r.exit_code == 0);
    }
    std::string walk_flags() const {
        return " --seed 3 --structural-window 5 --max-walk-len 12 --max-intervals 8";
    }
    std::string tiny_model() const { return " --d-h 8 --heads 2 --d-model 8 --blocks 1"; }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("synth ingest sample train eval round trip") {
    Fixture& f = fixture();
    TempDir out;

    const std::string run = out.str("run");
    RunResult r = run_cli("train --graph " + f.graph + " --walks " + f.walks + " --out " + run +
                          f.walk_flags() + f.tiny_model() + " --max-epochs 6 --patience 6");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(run + "/checkpoint.sswc"));

    const json metrics = json::parse(read_file(run + "/metrics.json"));
    for (const char* key : {"weighted_f1", "macro_f1", "per_class", "confusion", "config_hash",
                            "dataset_hash", "seed", "manifest_hash", "loss_curve", "best_epoch"})
        CHECK(metrics.contains(key));
    CHECK(metrics["weighted_f1"].get<double>() >= 0.0);
    CHECK(metrics["weighted_f1"].get<double>() <= 1.0);
    CHECK(metrics["confusion"].size() == 3);

    const std::string eval_out = out.str("eval.json");
    r = run_cli("eval --graph " + f.graph + " --walks " + f.walks + " --checkpoint " + run +
                "/checkpoint.sswc --out " + eval_out + f.walk_flags());
    CHECK(r.exit_code == 0);
    const json eval_metrics = json::parse(read_file(eval_out));
    CHECK(eval_metrics["weighted_f1"] == metrics["weighted_f1"]);
    CHECK(eval_metrics["confusion"] == metrics["confusion"]);
}

TEST_CASE("retraining into the same directory is byte identical") {
    Fixture& f = fixture();
    TempDir out;

    const std::string run = out.str("run");
    const std::string cmd = "train --graph " + f.graph + " --walks " + f.walks + " --out " + run +
                            f.walk_flags() + f.tiny_model() + " --max-epochs 4 --patience 4";
    REQUIRE(run_cli(cmd).exit_code == 0);
    const std::string metrics1 = read_file(run + "/metrics.json");
    const std::string ckpt1 = read_file(run + "/checkpoint.sswc");
    REQUIRE(run_cli(cmd).exit_code == 0);
    CHECK(read_file(run + "/metrics.json") == metrics1);
    CHECK(read_file(run + "/checkpoint.sswc") == ckpt1);
}

TEST_CASE("eval rejects model flags that contradict the checkpoint") {
    Fixture& f = fixture();
    TempDir out;

    const std::string run = out.str("run");
    REQUIRE(run_cli("train --graph " + f.graph + " --walks " + f.walks + " --out " + run +
                    f.walk_flags() + f.tiny_model() + " --max-epochs 2 --patience 2")
                .exit_code == 0);

    const std::string eval_out = out.str("eval.json");
    const RunResult r = run_cli("eval --graph " + f.graph + " --walks " + f.walks +
                                " --checkpoint " + run + "/checkpoint.sswc --out " + eval_out +
                                f.walk_flags() + " --d-h 16");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("error: config:") != std::string::npos);
    CHECK_FALSE(fs::exists(eval_out));
}

TEST_CASE("training against a cache sampled with other walk settings fails") {
    Fixture& f = fixture();
    TempDir out;

    const RunResult r =
        run_cli("train --graph " + f.graph + " --walks " + f.walks + " --out " + out.str("run") +
                " --seed 3 --structural-window 10 --max-walk-len 12 --max-intervals 8" +
                f.tiny_model() + " --max-epochs 2");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("re-run sample") != std::string::npos);
}

TEST_CASE("missing inputs and malformed rows map to distinct exit codes") {
    TempDir out;

    SUBCASE("absent graph file") {
        const RunResult r = run_cli("sample --graph " + out.str("nope.ssgr") + " --out " +
                                    out.str("w.jsonl"));
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("error: file:") != std::string::npos);
    }
    SUBCASE("unknown flag") {
        const RunResult r = run_cli("synth --out " + out.str("d") + " --bogus 1");
        CHECK(r.exit_code == 3);
    }
    SUBCASE("malformed transaction row") {
        const std::string tx = out.str("bad.csv");
        write_file(tx, "from,to,value,timestamp,block\n0xa,0xb,not_a_number,1600000000,1\n");
        const RunResult r = run_cli("ingest --tx " + tx + " --out " + out.str("g.ssgr"));
        CHECK(r.exit_code == 4);
        CHECK(r.output.find("error: data:") != std::string::npos);
    }
}

TEST_CASE("config file supplies defaults and flags override them") {
    TempDir out;

    const std::string cfg = out.str("run.toml");
    write_file(cfg, "[synth]\naccounts = 90\nscams = 2\nphishing = 2\nseed = 5\n");

    const std::string d1 = out.str("a");
    REQUIRE(run_cli("--config " + cfg + " synth --out " + d1).exit_code == 0);
    const json m1 = json::parse(read_file(d1 + "/manifest.json"));
    CHECK(m1["resolved_config"]["n_accounts"] == 90);
    CHECK(m1["resolved_config"]["scam_count"] == 2);

    const std::string d2 = out.str("b");
    REQUIRE(run_cli("--config " + cfg + " synth --out " + d2 + " --accounts 120").exit_code == 0);
    const json m2 = json::parse(read_file(d2 + "/manifest.json"));
    CHECK(m2["resolved_config"]["n_accounts"] == 120);
    CHECK(m2["resolved_config"]["scam_count"] == 2);

    const std::string bad = out.str("bad.toml");
    write_file(bad, "[synth]\naccounts = 90\nbogus_key = 7\n");
    const RunResult r = run_cli("--config " + bad + " synth --out " + out.str("c"));
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("error: config:") != std::string::npos);
}

TEST_CASE("manifest identity is stable and embedded in artifacts") {
    Fixture& f = fixture();
    TempDir out;

    const std::string run = out.str("run");
    REQUIRE(run_cli("train --graph " + f.graph + " --walks " + f.walks + " --out " + run +
                    f.walk_flags() + f.tiny_model() + " --max-epochs 2 --patience 2")
                .exit_code == 0);

    const json manifest = json::parse(read_file(run + "/manifest.json"));
    for (const char* key : {"command", "config_hash", "inputs", "outputs", "seed", "version",
                            "manifest_hash", "resolved_config", "created_unix"})
        CHECK(manifest.contains(key));
    CHECK(manifest["command"] == "train");

    const json metrics = json::parse(read_file(run + "/metrics.json"));
    CHECK(metrics["manifest_hash"] == manifest["manifest_hash"]);
}

TEST_CASE("help and version exit cleanly") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("train --help").exit_code == 0);
}
