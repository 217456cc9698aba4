#include "config.hpp"

#include <algorithm>
#include <cmath>

#include "youngbsde/io.hpp"

namespace cli {

using namespace ybsde;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string type_name(const json& j) {
    return j.type_name();
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string detail = e.what();
        if (const auto pos = detail.find("syntax error"); pos != std::string::npos) detail = detail.substr(pos);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail);
    }
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set '" + assignment + "': expected KEY=VALUE");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("--set '" + assignment + "': empty key segment");
        if (!node->is_object()) throw ConfigError("--set '" + assignment + "': '" + part + "' is not inside an object");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

Section::Section(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node.is_object()) throw ConfigError("config field '" + path_ + "': expected an object, got " + type_name(node));
}

bool Section::has(const std::string& key) const { return node_->contains(key); }

void Section::fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config field '" + join_path(path_, key) + "': " + what);
}

const json& Section::get(const std::string& key) {
    const auto it = node_->find(key);
    if (it == node_->end()) fail(key, "required but missing");
    used_.insert(key);
    return *it;
}

double Section::number(const std::string& key) {
    const json& j = get(key);
    if (!j.is_number()) fail(key, "expected a number, got " + type_name(j));
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(key, "must be finite");
    return v;
}

double Section::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

std::uint64_t Section::integer(const std::string& key) {
    const json& j = get(key);
    if (!j.is_number_integer()) fail(key, "expected an integer, got " + type_name(j));
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.get<std::int64_t>() < 0) fail(key, "must be non-negative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
}

std::uint64_t Section::integer(const std::string& key, std::uint64_t fallback) {
    return has(key) ? integer(key) : fallback;
}

std::string Section::text(const std::string& key) {
    const json& j = get(key);
    if (!j.is_string()) fail(key, "expected a string, got " + type_name(j));
    return j.get<std::string>();
}

std::string Section::text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
}

bool Section::flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& j = get(key);
    if (!j.is_boolean()) fail(key, "expected true or false, got " + type_name(j));
    return j.get<bool>();
}

std::vector<double> Section::numbers(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array()) fail(key, "expected an array of numbers, got " + type_name(j));
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number, got " + type_name(j[i]));
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::vector<double> Section::numbers(const std::string& key, std::vector<double> fallback) {
    return has(key) ? numbers(key) : std::move(fallback);
}

Section Section::child(const std::string& key) {
    const json& j = get(key);
    if (!j.is_object()) fail(key, "expected an object, got " + type_name(j));
    return Section(j, join_path(path_, key));
}

std::optional<Section> Section::optional_child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return child(key);
}

std::vector<Section> Section::children(const std::string& key) {
    const json& j = get(key);
    if (!j.is_array()) fail(key, "expected an array of objects, got " + type_name(j));
    std::vector<Section> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string name = key + "[" + std::to_string(i) + "]";
        if (!j[i].is_object()) fail(name, "expected an object, got " + type_name(j[i]));
        out.emplace_back(j[i], join_path(path_, name));
    }
    return out;
}

void Section::finish() const {
    for (const auto& [key, value] : node_->items()) {
        (void)value;
        if (!used_.contains(key)) fail(key, "unknown key");
    }
}

std::filesystem::path Context::resolve(const std::string& file) const {
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : base_dir / p;
}

ScalarFunction read_function(Section s) {
    const std::string base = s.text("base");
    const auto shape = parse_shape(base);
    if (!shape) s.fail("base", "unknown function '" + base + "' (constant, identity, tanh, sin, cos, square, sign)");
    const double a = s.number("a", 1.0);
    const double b = s.number("b", 1.0);
    const double c = s.number("c", 0.0);
    s.finish();
    return make_function(*shape, a, b, c);
}

namespace {

std::vector<ScalarFunction> read_functions(Section& s, const std::string& key) {
    std::vector<ScalarFunction> out;
    for (auto& f : s.children(key)) out.push_back(read_function(f));
    if (out.empty()) s.fail(key, "needs at least one function");
    return out;
}

std::size_t to_size(Section& s, const std::string& key, std::uint64_t v) {
    if (v > (std::uint64_t{1} << 40)) s.fail(key, "value too large");
    return static_cast<std::size_t>(v);
}

std::size_t read_size(Section& s, const std::string& key) { return to_size(s, key, s.integer(key)); }
std::size_t read_size(Section& s, const std::string& key, std::size_t fallback) {
    return to_size(s, key, s.integer(key, fallback));
}

EtaSpec read_eta_spec(Section s, const std::string& kind, std::size_t dimension, double horizon) {
    EtaSpec spec;
    spec.dimension = dimension;
    spec.horizon = horizon;
    if (kind == "sinusoid") {
        SinusoidSpec sin;
        sin.amplitudes = s.numbers("amplitudes");
        sin.frequencies = s.numbers("frequencies");
        sin.phases = s.numbers("phases", std::vector<double>(sin.amplitudes.size(), 0.0));
        spec.kind = sin;
    } else if (kind == "random_pl") {
        RandomPlSpec pl;
        pl.nodes = read_size(s, "nodes");
        pl.increment_scale = s.number("scale");
        pl.seed = s.integer("seed");
        spec.kind = pl;
    } else if (kind == "fbm") {
        FbmSpec fbm;
        fbm.hurst = s.number("hurst");
        fbm.seed = s.integer("seed");
        fbm.scale = s.number("scale", 1.0);
        spec.kind = fbm;
    } else if (kind == "mollified") {
        Section base = s.child("base");
        const std::string base_kind = base.text("kind");
        MollifiedSpec m;
        m.base = std::make_shared<EtaSpec>(read_eta_spec(base, base_kind, dimension, horizon));
        m.level = read_size(s, "level");
        spec.kind = m;
    } else {
        s.fail("kind", "unknown signal '" + kind + "' (sinusoid, random_pl, fbm, mollified, linear, csv)");
    }
    s.finish();
    return spec;
}

}  // namespace

TimeGrid read_grid(Section& s, double horizon, const char* key) {
    const std::size_t cells = read_size(s, key);
    if (cells == 0) s.fail(key, "must be positive");
    return TimeGrid::uniform(horizon, cells);
}

EtaSource read_eta(Section s, double horizon, const Context& ctx) {
    const std::string kind = s.text("kind");
    // A CSV path carries its own horizon; a non-positive value skips the check.
    if (kind != "csv" && horizon <= 0.0) horizon = 1.0;
    EtaSource out{DiscretePath::constant(TimeGrid::uniform(horizon > 0.0 ? horizon : 1.0, 1), std::vector<double>{0.0}), 0.0};
    if (kind == "csv") {
        const auto file = ctx.resolve(s.text("file"));
        s.finish();
        out.path = read_path_csv(file);
        if (horizon > 0.0 && std::abs(out.path.grid().horizon() - horizon) > 1e-12 * std::max(1.0, horizon))
            s.fail("file", "path horizon " + format_double(out.path.grid().horizon()) + " differs from " +
                               format_double(horizon));
        return out;
    }
    if (kind == "linear") {
        const std::vector<double> slopes = s.numbers("slopes");
        s.finish();
        if (slopes.empty()) s.fail("slopes", "needs at least one channel");
        std::vector<double> values(slopes.size(), 0.0);
        for (double v : slopes) values.push_back(v * horizon);
        out.path = DiscretePath(TimeGrid::uniform(horizon, 1), values, slopes.size());
        return out;
    }
    const std::size_t dimension = read_size(s, "dimension", 1);
    const TimeGrid grid = read_grid(s, horizon);
    const EtaSpec spec = read_eta_spec(s, kind, dimension, horizon);
    auto generated = generate_eta(spec, grid);
    out.path = std::move(generated.path);
    out.cholesky_jitter = generated.cholesky_jitter;
    return out;
}

Driver read_driver(Section s, std::size_t brownian_dim) {
    const double c = s.number("c", 0.0);
    const double a_y = s.number("a_y", 0.0);
    const double a_z = s.number("a_z", 0.0);
    const double k = s.number("k", 0.0);
    std::optional<ScalarFunction> term;
    if (auto t = s.optional_child("term")) term = read_function(*t);
    s.finish();
    if (k != 0.0 && !term) s.fail("term", "required when k is non-zero");
    if (term) return Driver::with_term(c, a_y, a_z, brownian_dim, k, *term);
    return Driver::affine(c, a_y, a_z, brownian_dim);
}

Terminal read_terminal(Section s, double* lipschitz) {
    const ScalarFunction h = read_function(s.child("function"));
    double bound = 0.0;
    if (s.has("bound")) {
        bound = s.number("bound");
        if (bound < 0.0) s.fail("bound", "must be non-negative");
    } else if (h.sup_bound && std::isfinite(*h.sup_bound)) {
        bound = *h.sup_bound;
    } else {
        s.fail("bound", "required for a terminal function without a finite sup bound");
    }
    if (lipschitz) {
        const double fallback = h.d1_bound && std::isfinite(*h.d1_bound) ? *h.d1_bound : 0.0;
        *lipschitz = s.number("lipschitz", fallback);
    }
    s.finish();
    return Terminal::of_first(h, bound);
}

SdeSpec read_sde(Section s) {
    const double b0 = s.number("b0", 0.0);
    const double b1 = s.number("b1", 0.0);
    const double s0 = s.number("s0", 1.0);
    const double s1 = s.number("s1", 0.0);
    const double x0 = s.number("x0", 0.0);
    const double start = s.number("start_time", 0.0);
    s.finish();
    return affine_sde(b0, b1, s0, s1, x0, start);
}

RegressionSpec read_regression(std::optional<Section> s) {
    RegressionSpec spec;
    if (!s) return spec;
    spec.degree = read_size(*s, "degree", spec.degree);
    spec.ridge = s->number("ridge", spec.ridge);
    spec.samples_per_basis = read_size(*s, "samples_per_basis", spec.samples_per_basis);
    s->finish();
    return spec;
}

BsdeSetup read_bsde_problem(Section s, const Context& ctx) {
    BsdeSetup out;
    auto& p = out.problem;
    p.horizon = s.number("horizon", 1.0);
    if (p.horizon <= 0.0) s.fail("horizon", "must be positive");
    out.steps = read_size(s, "steps");
    out.paths = read_size(s, "paths");
    if (out.steps == 0) s.fail("steps", "must be positive");
    if (out.paths < 2) s.fail("paths", "needs at least 2 paths");
    out.brownian_dim = read_size(s, "brownian_dim", 1);
    if (out.brownian_dim == 0) s.fail("brownian_dim", "must be positive");
    if (auto f = s.optional_child("forward")) {
        if (out.brownian_dim != 1) s.fail("forward", "affine forward dynamics need brownian_dim = 1");
        p.forward = read_sde(*f);
    }
    p.driver = s.has("driver") ? read_driver(s.child("driver"), out.brownian_dim) : Driver::zero();
    p.drift_fields = read_functions(s, "fields");
    auto eta = read_eta(s.child("eta"), p.horizon, ctx);
    p.eta = std::move(eta.path);
    out.eta_jitter = eta.cholesky_jitter;
    if (p.eta.dim() != p.drift_fields.size())
        s.fail("fields", "has " + std::to_string(p.drift_fields.size()) + " entries but eta has " +
                             std::to_string(p.eta.dim()) + " channels");
    p.terminal = read_terminal(s.child("terminal"));
    s.finish();
    return out;
}

PdeProblem read_pde_problem(Section s, const Context& ctx, double* eta_jitter) {
    PdeProblem p;
    p.horizon = s.number("horizon", 1.0);
    if (p.horizon <= 0.0) s.fail("horizon", "must be positive");
    if (auto sde = s.optional_child("sde")) p.sde = read_sde(*sde);
    p.driver = s.has("driver") ? read_driver(s.child("driver"), 1) : Driver::zero();
    p.drift_fields = read_functions(s, "fields");
    auto eta = read_eta(s.child("eta"), p.horizon, ctx);
    p.eta = std::move(eta.path);
    if (eta_jitter) *eta_jitter = eta.cholesky_jitter;
    if (p.eta.dim() != p.drift_fields.size())
        s.fail("fields", "has " + std::to_string(p.drift_fields.size()) + " entries but eta has " +
                             std::to_string(p.eta.dim()) + " channels");
    p.terminal = read_terminal(s.child("terminal"), &p.terminal_lipschitz);
    s.finish();
    return p;
}

FdSettings read_fd(std::optional<Section> s, double horizon) {
    FdSettings fd;
    if (!s) return fd;
    fd.t_cells = read_size(*s, "t_cells", fd.t_cells);
    fd.x_cells = read_size(*s, "x_cells", fd.x_cells);
    fd.theta = s->number("theta", fd.theta);
    fd.inner_iters = read_size(*s, "inner_iters", fd.inner_iters);
    fd.probe_lo = s->number("probe_lo", fd.probe_lo);
    fd.probe_hi = s->number("probe_hi", fd.probe_hi);
    if (s->has("sigma_max")) {
        // Box sized from the diffusion bound instead of explicit edges.
        const double sigma = s->number("sigma_max");
        if (s->has("x_lo") || s->has("x_hi")) s->fail("sigma_max", "give either sigma_max or x_lo/x_hi");
        std::tie(fd.x_lo, fd.x_hi) = fd_box(fd.probe_lo, fd.probe_hi, sigma, horizon);
    } else {
        fd.x_lo = s->number("x_lo", fd.x_lo);
        fd.x_hi = s->number("x_hi", fd.x_hi);
    }
    s->finish();
    return fd;
}

}  // namespace cli
