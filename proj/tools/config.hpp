#pragma once

// Strict reading of experiment configs. Every section tracks which keys it has
// consumed; finish() rejects whatever is left, so typos never pass silently.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "youngbsde/bsde.hpp"
#include "youngbsde/errors.hpp"
#include "youngbsde/functions.hpp"
#include "youngbsde/montecarlo.hpp"
#include "youngbsde/paths.hpp"
#include "youngbsde/regression.hpp"
#include "youngbsde/rpde.hpp"
#include "youngbsde/signals.hpp"

namespace cli {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

class ConfigError : public ybsde::ValidationError {
public:
    using ybsde::ValidationError::ValidationError;
};

/// Parses config text; syntax errors report line and column.
json parse_config_text(const std::string& text, const std::string& origin);

/// Applies `a.b.c=value`; the value is read as JSON when it parses, else as a string.
void apply_override(json& config, const std::string& assignment);

class Section {
public:
    Section(const json& node, std::string path);

    const std::string& path() const noexcept { return path_; }
    bool has(const std::string& key) const;

    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::uint64_t integer(const std::string& key);
    std::uint64_t integer(const std::string& key, std::uint64_t fallback);
    std::string text(const std::string& key);
    std::string text(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback);

    Section child(const std::string& key);
    std::optional<Section> optional_child(const std::string& key);
    std::vector<Section> children(const std::string& key);

    /// Rejects keys that were never read.
    void finish() const;

    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

private:
    const json& get(const std::string& key);

    const json* node_;
    std::string path_;
    std::set<std::string> used_;
};

/// Resolves file references in the config relative to its directory.
struct Context {
    std::filesystem::path base_dir;
    std::filesystem::path resolve(const std::string& file) const;
};

/// {"base": "tanh", "a": 1, "b": 1, "c": 0}
ybsde::ScalarFunction read_function(Section s);

struct EtaSource {
    ybsde::DiscretePath path;
    double cholesky_jitter = 0.0;
};

/// Signal recipes (sinusoid, random_pl, fbm, mollified, linear) or a path CSV.
/// Generated signals use horizon 1 when `horizon` is not positive.
EtaSource read_eta(Section s, double horizon, const Context& ctx);

ybsde::TimeGrid read_grid(Section& s, double horizon, const char* key = "cells");

/// {"c", "a_y", "a_z", "k", "term"}: f = c + a_y y + a_z sum z + k term(y).
ybsde::Driver read_driver(Section s, std::size_t brownian_dim);

/// {"function": {...}, "bound": B}; the bound defaults to the function's sup when finite.
ybsde::Terminal read_terminal(Section s, double* lipschitz = nullptr);

/// {"b0", "b1", "s0", "s1", "x0", "start_time"}: b = b0 + b1 x, sigma = s0 + s1 x.
ybsde::SdeSpec read_sde(Section s);

ybsde::RegressionSpec read_regression(std::optional<Section> s);

struct BsdeSetup {
    ybsde::BsdeProblem problem;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::size_t brownian_dim = 1;
    double eta_jitter = 0.0;
};

BsdeSetup read_bsde_problem(Section s, const Context& ctx);

ybsde::PdeProblem read_pde_problem(Section s, const Context& ctx, double* eta_jitter = nullptr);

/// Box edges come from x_lo/x_hi or from fd_box when sigma_max is given.
ybsde::FdSettings read_fd(std::optional<Section> s, double horizon);

}  // namespace cli
