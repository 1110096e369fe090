#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsusy/dynamics.hpp"
#include "tsusy/error.hpp"
#include "tsusy/oscillation.hpp"
#include "tsusy/profiles.hpp"
#include "tsusy/spatial.hpp"

namespace tsusy {

// ---------------------------------------------------------------------------
// `key = value` files. A `[name]` header prefixes the following keys with
// `name.`, which gives one nesting level. `#` starts a comment.

namespace detail {

/// Splits on commas that are not inside parentheses or brackets.
inline std::vector<std::string> split_top_level(std::string_view s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(' || s[i] == '[') ++depth;
        else if (s[i] == ')' || s[i] == ']') --depth;
        else if (s[i] == ',' && depth == 0) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(trim(s.substr(start)));
    return parts;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse(std::string_view text, std::filesystem::path base_dir = {}) {
        ConfigFile cfg;
        cfg.base_dir_ = std::move(base_dir);
        std::istringstream in{std::string(text)};
        std::string line, section;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            const std::string row = detail::trim(std::string_view(line).substr(0, hash));
            if (row.empty()) continue;
            if (row.front() == '[' && row.back() == ']') {
                section = detail::trim(std::string_view(row).substr(1, row.size() - 2));
                if (section.empty() || section.find('.') != std::string::npos)
                    throw Error(ErrorKind::Config, "line " + std::to_string(number) + ": bad section name");
                continue;
            }
            const auto eq = row.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorKind::Config, "line " + std::to_string(number) + ": expected key = value");
            std::string key = detail::trim(std::string_view(row).substr(0, eq));
            const std::string value = detail::trim(std::string_view(row).substr(eq + 1));
            if (key.empty()) throw Error(ErrorKind::Config, "line " + std::to_string(number) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            if (cfg.entries_.count(key)) throw Error(ErrorKind::Config, "duplicate key '" + key + "'");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    /// Missing or unreadable config files are configuration errors.
    static ConfigFile load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::Config, "cannot read config '" + path.string() + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse(buffer.str(), path.parent_path());
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

    std::optional<std::string> get(const std::string& key) const {
        used_.insert(key);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::string text(const std::string& key, const std::string& fallback) const { return get(key).value_or(fallback); }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw Error(ErrorKind::Config, "missing required key '" + key + "'");
        return *v;
    }

    double number(const std::string& key, double fallback) const {
        auto v = get(key);
        return v ? detail::parse_double(*v, key.c_str()) : fallback;
    }

    std::optional<double> maybe_number(const std::string& key) const {
        auto v = get(key);
        if (!v) return std::nullopt;
        return detail::parse_double(*v, key.c_str());
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        const double x = detail::parse_double(*v, key.c_str());
        if (!(x >= 0.0) || x != std::floor(x) || x > 1e9)
            throw Error(ErrorKind::Config, "'" + key + "' must be a non-negative integer");
        return static_cast<std::size_t>(x);
    }

    /// Throws on keys nobody asked for, which catches typos.
    void reject_unknown() const {
        for (const auto& [key, value] : entries_)
            if (!used_.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
    }

    /// Keys whose value is a bracketed list `[a, b, ...]`; these become sweep axes.
    std::vector<std::string> list_keys() const {
        std::vector<std::string> keys;
        for (const auto& [key, value] : entries_)
            if (is_list(value)) keys.push_back(key);
        return keys;
    }

    static bool is_list(const std::string& value) {
        return value.size() >= 2 && value.front() == '[' && value.back() == ']';
    }

    static std::vector<std::string> list_items(const std::string& value) {
        const auto inner = is_list(value) ? std::string_view(value).substr(1, value.size() - 2) : std::string_view(value);
        auto items = detail::split_top_level(inner);
        if (items.size() == 1 && items[0].empty()) throw Error(ErrorKind::Config, "empty list");
        for (const auto& item : items)
            if (item.empty()) throw Error(ErrorKind::Config, "empty list item in " + value);
        return items;
    }

private:
    std::map<std::string, std::string> entries_;
    std::filesystem::path base_dir_;
    mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Profiles: either `profile = sinusoidal(1, 0.01)` or a [profile] section
// with kind and parameters.

inline std::string resolve_path(const ConfigFile& cfg, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative() && !cfg.base_dir().empty()) p = cfg.base_dir() / p;
    return p.string();
}

inline std::string profile_spec_from(const ConfigFile& cfg) {
    if (auto inline_spec = cfg.get("profile")) {
        for (const char* k : {"profile.kind", "profile.m", "profile.m0", "profile.lambda", "profile.path"})
            if (cfg.has(k)) throw Error(ErrorKind::Config, "give the profile either inline or as a [profile] section");
        return *inline_spec;
    }
    const std::string kind = detail::lower(cfg.require("profile.kind"));
    if (kind == "constant") return "constant(" + cfg.require("profile.m") + ")";
    if (kind == "sinusoidal") return "sinusoidal(" + cfg.require("profile.m0") + ", " + cfg.require("profile.lambda") + ")";
    if (kind == "tabulated") return "tabulated(" + cfg.require("profile.path") + ")";
    throw Error(ErrorKind::Config, "unknown profile kind '" + kind + "'");
}

inline MassProfile profile_from_spec(const ConfigFile& cfg, const std::string& spec) {
    const std::string s = detail::trim(spec);
    if (s.rfind("tabulated(", 0) == 0 && s.back() == ')') {
        const std::string path = detail::trim(std::string_view(s).substr(10, s.size() - 11));
        return parse_profile_spec("tabulated(" + resolve_path(cfg, path) + ")");
    }
    return parse_profile_spec(s);
}

// ---------------------------------------------------------------------------

enum class Route { Coupled, Riccati, SecondOrder };

inline const char* to_string(Route r) {
    switch (r) {
    case Route::Coupled: return "coupled";
    case Route::Riccati: return "riccati";
    case Route::SecondOrder: return "second_order";
    }
    return "?";
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
    const auto v = detail::lower(s);
    if (v == "csv") return OutputFormat::Csv;
    if (v == "json") return OutputFormat::Json;
    throw Error(ErrorKind::Config, "format must be csv or json");
}

inline const char* to_string(ClosedFormMode m) {
    switch (m) {
    case ClosedFormMode::Massive: return "massive";
    case ClosedFormMode::URFull: return "ur_full";
    case ClosedFormMode::URReduced: return "ur_reduced";
    }
    return "?";
}

struct RunConfig {
    std::string scenario = "scenario";
    std::string profile_spec;
    MassProfile profile = MassProfile::constant(0.0);
    double k = 0.0;
    double theta = std::numbers::pi / 4;
    Convention convention = Convention::Physical;
    IcMode ic_mode = IcMode::UnitPair;
    double t0 = 0.0, t1 = 1.0;
    std::size_t samples = 1001;
    double rel_tol = 1e-9, abs_tol = 1e-12;
    std::optional<ClosedFormMode> closed_form;   // empty: numerical pipeline
    Route route = Route::Coupled;
    OutputFormat format = OutputFormat::Csv;
    std::string output;   // empty: stdout
    std::string svg;

    ScenarioParams params() const {
        ScenarioParams p;
        p.profile = profile;
        p.k = k;
        p.convention = convention;
        p.ic_mode = ic_mode;
        p.t0 = t0;
        p.t1 = t1;
        p.rel_tol = rel_tol;
        p.abs_tol = abs_tol;
        p.max_samples = samples;
        return p;
    }

    std::string probability_source() const {
        return closed_form ? std::string("closed_form(") + to_string(*closed_form) + ")" : "pipeline";
    }
};

namespace detail {

inline Convention parse_convention(const std::string& s) {
    const auto v = lower(s);
    if (v == "physical") return Convention::Physical;
    if (v == "wick") return Convention::Wick;
    throw Error(ErrorKind::Config, "convention must be physical or wick");
}

inline IcMode parse_ic_mode(const std::string& s) {
    const auto v = lower(s);
    if (v == "unit_pair" || v == "unitpair") return IcMode::UnitPair;
    if (v == "pure_branch" || v == "purebranch") return IcMode::PureBranch;
    throw Error(ErrorKind::Config, "ic_mode must be unit_pair or pure_branch");
}

inline Route parse_route(const std::string& s) {
    const auto v = lower(s);
    if (v == "coupled") return Route::Coupled;
    if (v == "riccati") return Route::Riccati;
    if (v == "second_order") return Route::SecondOrder;
    throw Error(ErrorKind::Config, "route must be coupled, riccati or second_order");
}

inline ClosedFormMode parse_closed_form_mode(const std::string& s) {
    const auto v = lower(s);
    if (v == "massive") return ClosedFormMode::Massive;
    if (v == "ur_full" || v == "urfull") return ClosedFormMode::URFull;
    if (v == "ur_reduced" || v == "urreduced") return ClosedFormMode::URReduced;
    throw Error(ErrorKind::Config, "closed-form mode must be massive, ur_full or ur_reduced");
}

/// `pipeline` or `closed_form(mode)`
inline std::optional<ClosedFormMode> parse_probability_source(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "pipeline") return std::nullopt;
    const std::string head = "closed_form(";
    if (v.rfind(head, 0) == 0 && v.back() == ')')
        return parse_closed_form_mode(trim(std::string_view(v).substr(head.size(), v.size() - head.size() - 1)));
    throw Error(ErrorKind::Config, "probability_source must be pipeline or closed_form(mode)");
}

} // namespace detail

/// Reads and validates a scenario. Nothing is computed here.
inline RunConfig run_config_from(const ConfigFile& cfg) {
    RunConfig rc;
    rc.scenario = cfg.text("scenario", "scenario");
    rc.profile_spec = profile_spec_from(cfg);
    rc.profile = profile_from_spec(cfg, rc.profile_spec);
    rc.k = cfg.number("k", 0.0);
    const auto theta = cfg.maybe_number("theta");
    const auto s22 = cfg.maybe_number("sin2_2theta");
    if (theta && s22) throw Error(ErrorKind::Config, "give theta or sin2_2theta, not both");
    if (theta) rc.theta = *theta;
    if (s22) rc.theta = MixingConfig::from_sin2_2theta(*s22).theta;
    MixingConfig{rc.theta}.validate();
    rc.convention = detail::parse_convention(cfg.text("convention", "physical"));
    rc.ic_mode = detail::parse_ic_mode(cfg.text("ic_mode", "unit_pair"));
    const auto domain = rc.profile.domain();
    rc.t0 = cfg.number("t0", std::isfinite(domain.lo) ? std::max(domain.lo, 0.0) : 0.0);
    const auto t1 = cfg.maybe_number("t1");
    if (!t1 && !std::isfinite(domain.hi)) throw Error(ErrorKind::Config, "missing required key 't1'");
    rc.t1 = t1 ? *t1 : domain.hi;
    rc.samples = cfg.count("samples", 1001);
    rc.rel_tol = cfg.number("rel_tol", 1e-9);
    rc.abs_tol = cfg.number("abs_tol", 1e-12);
    rc.closed_form = detail::parse_probability_source(cfg.text("probability_source", "pipeline"));
    rc.route = detail::parse_route(cfg.text("route", "coupled"));
    rc.format = parse_format(cfg.text("format", "csv"));
    // Output paths are taken relative to the working directory; input
    // tables relative to the config file.
    rc.output = cfg.text("output", "");
    rc.svg = cfg.text("svg", "");
    cfg.reject_unknown();

    rc.params().validate();
    if (rc.samples < 3) throw Error(ErrorKind::Config, "probability needs at least 3 samples");
    if (rc.closed_form && *rc.closed_form != ClosedFormMode::Massive) {
        if (rc.profile.kind() != MassProfile::Kind::Sinusoidal)
            throw Error(ErrorKind::Config, "ultra-relativistic closed forms need a sinusoidal profile");
        if (!(rc.k > 0.0)) throw Error(ErrorKind::Config, "ultra-relativistic closed forms need k > 0");
        if (rc.t0 < 0.0) throw Error(ErrorKind::Config, "ultra-relativistic closed forms start at t = 0");
    }
    if (!rc.closed_form) rc.params().require_integrable();
    return rc;
}

// ---------------------------------------------------------------------------

struct AlgebraConfig {
    std::string profile_spec;
    MassProfile profile = MassProfile::constant(0.0);
    double t0 = 0.0, t1 = 1.0;
    std::size_t points = 400;
    Scheme scheme = Scheme::Central;
    std::size_t refinements = 4;
};

inline AlgebraConfig algebra_config_from(const ConfigFile& cfg) {
    AlgebraConfig ac;
    ac.profile_spec = profile_spec_from(cfg);
    ac.profile = profile_from_spec(cfg, ac.profile_spec);
    const auto domain = ac.profile.domain();
    ac.t0 = cfg.number("t0", std::isfinite(domain.lo) ? std::max(domain.lo, 0.0) : 0.0);
    const auto t1 = cfg.maybe_number("t1");
    if (!t1 && !std::isfinite(domain.hi)) throw Error(ErrorKind::Config, "missing required key 't1'");
    ac.t1 = t1 ? *t1 : domain.hi;
    ac.points = cfg.count("points", 400);
    const auto scheme = detail::lower(cfg.text("scheme", "central"));
    if (scheme == "central") ac.scheme = Scheme::Central;
    else if (scheme == "forward") ac.scheme = Scheme::Forward;
    else throw Error(ErrorKind::Config, "scheme must be central or forward");
    ac.refinements = cfg.count("refinements", 4);
    if (ac.refinements < 2) throw Error(ErrorKind::Config, "need at least 2 refinements for an order fit");
    cfg.reject_unknown();
    TimeGrid(ac.t0, ac.t1, ac.points);
    ac.profile.require_in_domain(ac.t0);
    ac.profile.require_in_domain(ac.t1);
    return ac;
}

// ---------------------------------------------------------------------------

struct AnsatzConfig {
    SpatialAnsatz ansatz;
    std::string f_spec = "constant(1)";
    std::vector<std::size_t> refine{16, 32, 64};
};

namespace detail {

inline AxialProfile parse_axial_profile(const ConfigFile& cfg, const std::string& spec) {
    const std::string s = trim(spec);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') throw Error(ErrorKind::Config, "malformed f spec '" + s + "'");
    const std::string name = lower(trim(std::string_view(s).substr(0, open)));
    const auto args = split_top_level(std::string_view(s).substr(open + 1, s.size() - open - 2));
    if (name == "constant") {
        if (args.size() != 1) throw Error(ErrorKind::Config, "constant(c) takes one argument");
        return AxialProfile::constant(parse_double(args[0], "f constant"));
    }
    if (name == "gaussian") {
        if (args.empty() || args.size() > 2) throw Error(ErrorKind::Config, "gaussian(width[, center])");
        return AxialProfile::gaussian(parse_double(args[0], "width"),
                                      args.size() > 1 ? parse_double(args[1], "center") : 0.0);
    }
    if (name == "tabulated") {
        if (args.size() != 1) throw Error(ErrorKind::Config, "tabulated(path) takes one argument");
        // Same two-column CSV reader as tabulated masses.
        const auto curve = load_tabulated_csv(resolve_path(cfg, args[0])).table();
        return AxialProfile::tabulated(curve.times(), curve.values());
    }
    throw Error(ErrorKind::Config, "unknown f kind '" + name + "'");
}

inline std::array<double, 3> triple(const ConfigFile& cfg, const std::string& key, double fallback) {
    auto v = cfg.get(key);
    if (!v) return {fallback, fallback, fallback};
    const auto items = ConfigFile::list_items(*v);
    if (items.size() == 1) {
        const double x = parse_double(items[0], key.c_str());
        return {x, x, x};
    }
    if (items.size() != 3) throw Error(ErrorKind::Config, "'" + key + "' takes one value or three");
    return {parse_double(items[0], key.c_str()), parse_double(items[1], key.c_str()), parse_double(items[2], key.c_str())};
}

} // namespace detail

inline AnsatzConfig ansatz_config_from(const ConfigFile& cfg) {
    AnsatzConfig ac;
    auto& a = ac.ansatz;
    a.k1 = cfg.number("k1", 1.0);
    a.k2 = cfg.number("k2", 0.0);
    ac.f_spec = cfg.text("f", "constant(1)");
    a.f = detail::parse_axial_profile(cfg, ac.f_spec);
    a.region.lo = detail::triple(cfg, "region.lo", 0.0);
    a.region.hi = detail::triple(cfg, "region.hi", 1.0);
    const auto n = detail::triple(cfg, "region.n", 64.0);
    for (int i = 0; i < 3; ++i) {
        if (!(n[i] >= 0.0) || n[i] != std::floor(n[i])) throw Error(ErrorKind::Config, "region.n must be integers");
        a.region.n[i] = static_cast<std::size_t>(n[i]);
    }
    const auto d = detail::lower(cfg.text("derivatives", "finite_difference"));
    if (d == "finite_difference") a.derivatives = Derivatives::FiniteDifference;
    else if (d == "analytic") a.derivatives = Derivatives::Analytic;
    else throw Error(ErrorKind::Config, "derivatives must be finite_difference or analytic");
    if (auto r = cfg.get("refine")) {
        ac.refine.clear();
        for (const auto& item : ConfigFile::list_items(*r)) {
            const double x = detail::parse_double(item, "refine");
            if (!(x >= 16.0) || x != std::floor(x)) throw Error(ErrorKind::Config, "refine entries must be integers >= 16");
            ac.refine.push_back(static_cast<std::size_t>(x));
        }
        if (ac.refine.size() == 1) throw Error(ErrorKind::Config, "refine needs at least two grids");
    }
    cfg.reject_unknown();
    a.validate();
    return ac;
}

} // namespace tsusy
