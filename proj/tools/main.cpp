// youngbsde: batch driver. One subcommand per experiment kind, one JSON config per
// run, CSV outputs plus manifest.json in the output directory.
//
// Exit codes: 0 success, 2 invalid config or arguments, 3 numerical abort,
// 1 anything else (I/O failures, internal errors).

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

#ifndef YOUNGBSDE_VERSION
#define YOUNGBSDE_VERSION "unknown"
#endif

namespace {

using cli::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        out += buf;
    }
    return out;
}

struct Arguments {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::string> out;
    unsigned workers = 1;
    std::optional<std::uint64_t> seed;
};

class Manifest {
public:
    Manifest(std::string command) {
        doc_ = {{"manifest_version", "1"}, {"command", std::move(command)}, {"status", "failed"},
                {"version", YOUNGBSDE_VERSION}, {"files", json::array()}, {"timings", json::array()}};
    }

    void set_config(const json& effective, const fs::path& base_dir) {
        // Keys are sorted by the json object type, so the dump is canonical.
        doc_["effective_config"] = effective;
        doc_["config_hash"] = "sha256:" + sha256_hex(effective.dump());
        doc_["base_dir"] = base_dir.string();
    }
    void set(const std::string& key, json value) { doc_[key] = std::move(value); }

    void write(const fs::path& dir) const {
        if (dir.empty()) return;
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
        if (out) out << doc_.dump(2) << '\n';
    }

private:
    json doc_;
};

int fail(Manifest& manifest, const fs::path& out_dir, int code, const std::string& kind, const std::string& message) {
    std::cerr << "error: " << message << '\n';
    manifest.set("status", "failed");
    manifest.set("exit_code", code);
    manifest.set("error", {{"kind", kind}, {"message", message}});
    manifest.write(out_dir);
    return code;
}

int execute(const std::string& command, const Arguments& args) {
    Manifest manifest(command);
    fs::path out_dir = args.out ? fs::path(*args.out) : fs::path("out");
    std::optional<cli::Run> run;
    auto record_partial = [&] {
        if (!run) return;
        manifest.set("files", run->files());
        manifest.set("timings", run->timings());
    };
    try {
        std::ifstream in(args.config_path, std::ios::binary);
        if (!in) throw cli::ConfigError("cannot read config file '" + args.config_path + "'");
        std::stringstream text;
        text << in.rdbuf();
        json config = cli::parse_config_text(text.str(), args.config_path);
        fs::path base_dir = fs::absolute(fs::path(args.config_path)).parent_path();

        // A manifest is accepted as a config: its echo is re-run as is.
        if (config.is_object() && config.contains("effective_config")) {
            if (config.value("command", command) != command)
                throw cli::ConfigError("manifest was written by '" + config.value("command", std::string()) +
                                       "', not '" + command + "'");
            if (config.contains("base_dir") && config["base_dir"].is_string())
                base_dir = config["base_dir"].get<std::string>();
            json echo = config["effective_config"];
            config = std::move(echo);
        }
        if (!config.is_object()) throw cli::ConfigError("config must be a JSON object");
        for (const auto& s : args.sets) cli::apply_override(config, s);
        if (args.seed) config["seed"] = *args.seed;

        cli::Section root(config, "");
        const std::string version = root.text("schema_version");
        if (version != cli::kSchemaVersion)
            root.fail("schema_version", "unsupported version '" + version + "' (expected \"1\")");
        if (root.has("output_dir")) {
            const std::string configured = root.text("output_dir");
            if (!args.out) out_dir = configured;
        }
        std::optional<std::uint64_t> seed;
        if (root.has("seed")) seed = root.integer("seed");

        manifest.set_config(config, base_dir);
        manifest.set("workers", args.workers);
        fs::create_directories(out_dir);
        manifest.write(out_dir);  // marked failed until the command completes

        run.emplace(out_dir, args.workers, cli::Context{base_dir});
        run->set_seed(seed);
        cli::run_command(command, root, *run);

        manifest.set("files", run->files());
        manifest.set("timings", run->timings());
        manifest.set("results", run->results());
        manifest.set("status", "ok");
        manifest.set("exit_code", 0);
        manifest.write(out_dir);
        return 0;
    } catch (const ybsde::ValidationError& e) {
        record_partial();
        return fail(manifest, out_dir, 2, "validation", e.what());
    } catch (const ybsde::NumericalError& e) {
        record_partial();
        std::string msg = e.what();
        if (e.index()) msg += " (index " + std::to_string(*e.index()) + ")";
        return fail(manifest, out_dir, 3, "numerical", msg);
    } catch (const std::exception& e) {
        record_partial();
        return fail(manifest, out_dir, 1, "internal", e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Young analysis and BSDE experiments driven by JSON configs"};
    app.set_version_flag("--version", std::string(YOUNGBSDE_VERSION));
    app.require_subcommand(1);

    Arguments args;
    std::vector<CLI::App*> subs;
    for (const auto& name : cli::kCommands) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", args.config_path, "JSON config file (or a manifest.json to re-run)")->required();
        sub->add_option("--set", args.sets, "override KEY=VALUE, dotted keys, repeatable");
        sub->add_option("--out", args.out, "output directory (default: config output_dir, else ./out)");
        sub->add_option("--workers", args.workers, "worker threads; results do not depend on it")
            ->check(CLI::Range(1u, 1024u));
        sub->add_option("--seed", args.seed, "overrides the config seed");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (auto* sub : subs)
        if (sub->parsed()) return execute(sub->get_name(), args);
    return 2;
}
