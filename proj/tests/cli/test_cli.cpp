// End-to-end checks of the youngbsde executable on the bundled configs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "youngbsde/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = YOUNGBSDE_CLI_PATH;
const fs::path kConfigs = YOUNGBSDE_CONFIG_DIR;
const fs::path kScratch = fs::path(YOUNGBSDE_SCRATCH_DIR) / "cli_scratch";

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome run_cli(const std::string& args, const std::string& tag) {
    fs::create_directories(kScratch);
    const fs::path out = kScratch / (tag + ".stdout");
    const fs::path err = kScratch / (tag + ".stderr");
    const std::string cmd = "'" + kCli.string() + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = kScratch / name;
    fs::remove_all(dir);
    return dir;
}

json read_json(const fs::path& file) { return json::parse(slurp(file)); }

std::vector<fs::path> csv_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv" || e.path().filename() == "summary.json") out.push_back(e.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

void require_identical_outputs(const fs::path& a, const fs::path& b) {
    const auto files = csv_files(a);
    REQUIRE_FALSE(files.empty());
    CHECK(files == csv_files(b));
    for (const auto& f : files) {
        INFO(f.string());
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

// Bundled config -> subcommand, by file name.
const std::map<std::string, std::string> kBundled{
    {"pvar_zigzag", "pvar"},         {"young_sinusoid", "young"},       {"ode_linear", "ode"},
    {"gen_eta_fbm", "gen-eta"},      {"sde_gbm", "sde"},                {"bsde_constant_g", "bsde"},
    {"bsde_tanh", "bsde"},           {"bsde_picard", "bsde"},           {"pde_fd", "pde"},
    {"pde_feynman_kac", "pde"},      {"study_stability", "study-stability"},
    {"study_convergence", "study-convergence"},
};

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("pvar on the zigzag fixture prints sqrt(2) at p = 2") {
        const auto dir = fresh_dir("zigzag");
        const auto o = run_cli("pvar --config '" + (kConfigs / "pvar_zigzag.json").string() + "' --out '" +
                                   dir.string() + "'",
                               "zigzag");
        REQUIRE(o.code == 0);
        CHECK(o.out.find("pvar p=2 " + ybsde::format_double(std::sqrt(2.0))) != std::string::npos);
        CHECK(read_json(dir / "manifest.json")["status"] == "ok");
    }

    TEST_CASE("bsde with constant g gives y0 = c + eta_T - eta_0") {
        const auto dir = fresh_dir("constant_g");
        const auto o = run_cli("bsde --config '" + (kConfigs / "bsde_constant_g.json").string() + "' --out '" +
                                   dir.string() + "'",
                               "constant_g");
        REQUIRE(o.code == 0);
        const json summary = read_json(dir / "summary.json");
        // Fixture: c = 0.7, eta = 0.3 sin(2 pi 0.75 t + 0.5) on [0, 1].
        const double expected =
            0.7 + 0.3 * (std::sin(2.0 * std::numbers::pi * 0.75 + 0.5) - std::sin(0.5));
        CHECK(std::abs(summary["y0"].get<double>() - expected) <= 1e-12);
        for (const char* key : {"y0", "bp_norm", "bmo_norm", "scheme", "seed", "steps", "paths"})
            CHECK(summary.contains(key));
        CHECK(summary["scheme"] == "backward");
        CHECK(summary["seed"] == 1);
        CHECK(fs::exists(dir / "slices.csv"));
        CHECK(fs::exists(dir / "slice_0.csv"));
    }

    TEST_CASE("every bundled config runs and lists its outputs") {
        for (const auto& [name, command] : kBundled) {
            INFO(name);
            const auto dir = fresh_dir("bundled_" + name);
            const auto o = run_cli(command + " --config '" + (kConfigs / (name + ".json")).string() + "' --out '" +
                                       dir.string() + "'",
                                   "bundled_" + name);
            CHECK(o.code == 0);
            const json manifest = read_json(dir / "manifest.json");
            CHECK(manifest["status"] == "ok");
            CHECK(manifest["command"] == command);
            CHECK(manifest["config_hash"].get<std::string>().rfind("sha256:", 0) == 0);
            for (const auto& f : manifest["files"]) CHECK(fs::exists(dir / f.get<std::string>()));
        }
    }

    TEST_CASE("reruns with the same seed are byte-identical whatever the worker count") {
        for (const std::string name : {"bsde_tanh", "sde_gbm", "gen_eta_fbm", "pde_feynman_kac"}) {
            INFO(name);
            const auto a = fresh_dir("rerun_a_" + name);
            const auto b = fresh_dir("rerun_b_" + name);
            const std::string config = "--config '" + (kConfigs / (name + ".json")).string() + "'";
            REQUIRE(run_cli(kBundled.at(name) + " " + config + " --out '" + a.string() + "'", "rerun_a").code == 0);
            REQUIRE(run_cli(kBundled.at(name) + " " + config + " --workers 3 --out '" + b.string() + "'", "rerun_b")
                        .code == 0);
            require_identical_outputs(a, b);
            CHECK(read_json(a / "manifest.json")["config_hash"] == read_json(b / "manifest.json")["config_hash"]);
        }
    }

    TEST_CASE("re-running from the manifest echo reproduces the run") {
        const auto a = fresh_dir("echo_a");
        const auto b = fresh_dir("echo_b");
        REQUIRE(run_cli("bsde --config '" + (kConfigs / "bsde_picard.json").string() +
                            "' --set problem.paths=3000 --seed 9 --out '" + a.string() + "'",
                        "echo_a")
                    .code == 0);
        const json first = read_json(a / "manifest.json");
        CHECK(first["effective_config"]["seed"] == 9);
        CHECK(first["effective_config"]["problem"]["paths"] == 3000);
        REQUIRE(run_cli("bsde --config '" + (a / "manifest.json").string() + "' --out '" + b.string() + "'", "echo_b")
                    .code == 0);
        require_identical_outputs(a, b);
        CHECK(first["config_hash"] == read_json(b / "manifest.json")["config_hash"]);
    }

    TEST_CASE("the seed flag changes the sample and is echoed") {
        const auto a = fresh_dir("seed_a");
        const auto b = fresh_dir("seed_b");
        const std::string config = "--config '" + (kConfigs / "sde_gbm.json").string() + "'";
        REQUIRE(run_cli("sde " + config + " --out '" + a.string() + "'", "seed_a").code == 0);
        REQUIRE(run_cli("sde " + config + " --seed 4 --out '" + b.string() + "'", "seed_b").code == 0);
        CHECK(slurp(a / "moments.csv") != slurp(b / "moments.csv"));
        CHECK(read_json(a / "manifest.json")["config_hash"] != read_json(b / "manifest.json")["config_hash"]);
    }

    TEST_CASE("unknown keys are rejected with the field path and exit code 2") {
        const auto dir = fresh_dir("unknown_key");
        const auto o = run_cli("bsde --config '" + (kConfigs / "bsde_tanh.json").string() +
                                   "' --set problem.driver.a_yy=1 --out '" + dir.string() + "'",
                               "unknown_key");
        CHECK(o.code == 2);
        CHECK(o.err.find("problem.driver.a_yy") != std::string::npos);
        const json manifest = read_json(dir / "manifest.json");
        CHECK(manifest["status"] == "failed");
        CHECK(manifest["error"]["kind"] == "validation");
        CHECK(manifest["files"].empty());
    }

    TEST_CASE("malformed config text reports line and column") {
        const auto dir = fresh_dir("malformed");
        fs::create_directories(dir);
        const fs::path bad = dir / "bad.json";
        std::ofstream(bad) << "{\n  \"schema_version\": \"1\",\n  \"seed\": 1,,\n}\n";
        const auto o = run_cli("bsde --config '" + bad.string() + "' --out '" + (dir / "out").string() + "'",
                               "malformed");
        CHECK(o.code == 2);
        CHECK(o.err.find("bad.json:3:") != std::string::npos);
        CHECK(read_json(dir / "out" / "manifest.json")["status"] == "failed");
    }

    TEST_CASE("type errors, missing seeds and schema mismatches exit with 2") {
        const std::string config = "--config '" + (kConfigs / "bsde_tanh.json").string() + "'";
        const auto out = " --out '" + fresh_dir("invalid").string() + "'";
        CHECK(run_cli("bsde " + config + " --set problem.paths=abc" + out, "invalid1").code == 2);
        CHECK(run_cli("bsde " + config + " --set schema_version=2" + out, "invalid2").code == 2);
        CHECK(run_cli("bsde " + config + " --set problem.fields=[]" + out, "invalid3").code == 2);
        const auto o = run_cli("sde --config '" + (kConfigs / "gen_eta_fbm.json").string() + "'" + out, "invalid4");
        CHECK(o.code == 2);
        CHECK(run_cli("frobnicate", "invalid5").code == 2);
    }

    TEST_CASE("a refused cell is a numerical abort with exit code 3") {
        const auto dir = fresh_dir("numerical");
        const auto o = run_cli("bsde --config '" + (kConfigs / "bsde_tanh.json").string() +
                                   "' --set 'problem.fields=[{\"base\":\"tanh\",\"a\":400}]' --out '" + dir.string() +
                                   "'",
                               "numerical");
        CHECK(o.code == 3);
        CHECK(o.err.find("refine the grid") != std::string::npos);
        const json manifest = read_json(dir / "manifest.json");
        CHECK(manifest["status"] == "failed");
        CHECK(manifest["error"]["kind"] == "numerical");
    }
}
