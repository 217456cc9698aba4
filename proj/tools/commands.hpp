#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "youngbsde/paths.hpp"

namespace cli {

/// Everything a subcommand needs besides its config: where to write, how many
/// workers to use, and the bookkeeping that ends up in the manifest.
class Run {
public:
    Run(std::filesystem::path out_dir, unsigned workers, Context ctx)
        : out_dir_(std::move(out_dir)), workers_(workers), ctx_(std::move(ctx)) {}

    unsigned workers() const noexcept { return workers_; }
    const Context& context() const noexcept { return ctx_; }
    const std::optional<std::uint64_t>& seed() const noexcept { return seed_; }
    void set_seed(std::optional<std::uint64_t> seed) { seed_ = seed; }
    /// The top-level seed; a missing one is a config error for commands that sample.
    std::uint64_t require_seed() const;

    void write_table(const std::string& name, std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows);
    void write_path(const std::string& name, const ybsde::DiscretePath& path);
    void write_json(const std::string& name, const json& document);

    template <class Fn>
    auto timed(const std::string& operation, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        struct Record {
            Run* run;
            std::string op;
            std::chrono::steady_clock::time_point start;
            ~Record() {
                const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
                run->timings_.push_back({{"operation", op}, {"seconds", d.count()}});
            }
        } stamp{this, operation, start};
        return fn();
    }

    /// Scalar results echoed into the manifest and printed.
    void report(const std::string& key, const json& value);
    /// Manifest-only result.
    void record(const std::string& key, json value);

    const std::vector<std::string>& files() const noexcept { return files_; }
    const json& timings() const noexcept { return timings_; }
    const json& results() const noexcept { return results_; }

private:
    std::filesystem::path target(const std::string& name);

    std::filesystem::path out_dir_;
    unsigned workers_;
    Context ctx_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> files_;
    json timings_ = json::array();
    json results_ = json::object();
};

inline const std::vector<std::string> kCommands{"pvar", "young", "ode", "gen-eta", "sde", "bsde",
                                                "pde", "study-stability", "study-convergence"};

/// Reads the command's keys from `root` (which must be finished by the callee) and writes outputs.
void run_command(const std::string& command, Section& root, Run& run);

}  // namespace cli
