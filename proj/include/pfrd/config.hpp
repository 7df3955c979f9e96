#pragma once

// Run configuration: a sectioned key=value document.
//
//   # comment
//   [domain]   length, points, period?, cells?
//   [model]    sigma, beta
//   [reaction] kind, params?, inner_kind?, inner_params?
//   [scheme]   variant, dt, t_end
//   [initial]  kind, params?, seed?
//   [output]   dir?, stride?, format?
//   [ode]      substeps?, blowup_threshold?, max_growth?        (optional section)
//   [analysis] fit_min?, fit_max?, skip_cells?, outer_fraction?, levels?
//
// Lists are comma separated. Unknown sections or keys are errors.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pfrd/error.hpp"
#include "pfrd/kernel.hpp"
#include "pfrd/peregrine.hpp"
#include "pfrd/reaction.hpp"
#include "pfrd/splitting.hpp"

namespace pfrd {

enum class InitialKind { constant, cosine, gaussian_bump, raised_cosine_bump, peregrine_sum, random_bounded };

inline std::string_view to_string(InitialKind k) {
    switch (k) {
        case InitialKind::constant: return "constant";
        case InitialKind::cosine: return "cosine";
        case InitialKind::gaussian_bump: return "gaussian_bump";
        case InitialKind::raised_cosine_bump: return "raised_cosine_bump";
        case InitialKind::peregrine_sum: return "peregrine_sum";
        case InitialKind::random_bounded: return "random_bounded";
    }
    return "?";
}

enum class OutputFormat { csv, bin };

struct RunConfig {
    struct Domain {
        double length = 0.0;
        std::size_t points = 0;
        std::optional<double> period;
        std::optional<std::size_t> cells;
    } domain;
    DiffusionParams model;
    struct Reaction {
        ReactionKind kind = ReactionKind::quadratic;
        std::vector<double> params;
        std::optional<ReactionKind> inner_kind;
        std::vector<double> inner_params;
    } reaction;
    struct Scheme {
        SplitVariant variant = SplitVariant::lie_full;
        double dt = 1e-3;
        double t_end = 1.0;
    } scheme;
    struct Initial {
        InitialKind kind = InitialKind::constant;
        std::vector<double> params;
        std::optional<std::uint64_t> seed;
    } initial;
    struct Output {
        std::string dir = "out";
        std::size_t stride = 1;
        OutputFormat format = OutputFormat::csv;
    } output;
    OdeOptions ode;
    struct Analysis {
        std::optional<double> fit_min, fit_max;
        std::optional<std::size_t> skip_cells;
        double outer_fraction = 0.1;
        std::size_t levels = 4;
    } analysis;

    /// Raw key/value pairs as parsed, keyed by "section.key" (manifest echo).
    std::map<std::string, std::string> raw;

    ReactionSpec reaction_spec() const {
        if (reaction.kind == ReactionKind::modulated)
            return ReactionSpec::modulated(reaction.params.at(0), reaction.params.at(1),
                                           ReactionSpec::from_params(*reaction.inner_kind, reaction.inner_params));
        return ReactionSpec::from_params(reaction.kind, reaction.params);
    }
    std::size_t components() const { return reaction_spec().component_count(); }
    GridSpec grid() const { return make_grid(domain.points, domain.length, components()); }
    SplitScheme split_scheme() const { return SplitScheme{scheme.variant, scheme.dt}; }
    bool has_lattice() const { return domain.period.has_value(); }
    LatticeSpec lattice() const {
        if (!has_lattice()) throw ConfigError("lattice requires domain.period and domain.cells", "domain.period");
        return LatticeSpec{*domain.period, *domain.cells, domain.points / *domain.cells};
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& text, const std::string& path) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a finite real, got '" + text + "'", path);
    }
}

inline std::int64_t parse_integer(const std::string& text, const std::string& path) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + text + "'", path);
    }
}

inline std::vector<double> parse_list(const std::string& text, const std::string& path) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), path));
    return out;
}

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"domain", {"length", "points", "period", "cells"}},
        {"model", {"sigma", "beta"}},
        {"reaction", {"kind", "params", "inner_kind", "inner_params"}},
        {"scheme", {"variant", "dt", "t_end"}},
        {"initial", {"kind", "params", "seed"}},
        {"output", {"dir", "stride", "format"}},
        {"ode", {"substeps", "blowup_threshold", "max_growth"}},
        {"analysis", {"fit_min", "fit_max", "skip_cells", "outer_fraction", "levels"}},
    };
    return schema;
}

}  // namespace detail

/// Parses and validates a configuration document. Throws ConfigError naming
/// the offending section.key.
inline RunConfig parse_config(std::string_view text) {
    using detail::trim;
    const auto& schema = detail::config_schema();
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header on line " + std::to_string(lineno));
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!schema.contains(section)) throw ConfigError("unknown section", section);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value on line " + std::to_string(lineno));
        if (section.empty()) throw ConfigError("key outside any section on line " + std::to_string(lineno));
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string path = section + "." + key;
        if (!schema.at(section).contains(key)) throw ConfigError("unknown key", path);
        if (kv.contains(path)) throw ConfigError("duplicate key", path);
        kv[path] = trim(std::string_view(s).substr(eq + 1));
    }

    auto has = [&](const std::string& p) { return kv.contains(p); };
    auto req = [&](const std::string& p) -> const std::string& {
        auto it = kv.find(p);
        if (it == kv.end()) throw ConfigError("missing mandatory key", p);
        return it->second;
    };
    auto real = [&](const std::string& p) { return detail::parse_real(req(p), p); };
    auto count = [&](const std::string& p, std::int64_t min) {
        const auto v = detail::parse_integer(req(p), p);
        if (v < min) throw ConfigError("must be >= " + std::to_string(min), p);
        return static_cast<std::size_t>(v);
    };

    RunConfig cfg;
    cfg.raw = kv;

    // domain
    cfg.domain.length = real("domain.length");
    if (!(cfg.domain.length > 0.0)) throw ConfigError("must be positive", "domain.length");
    cfg.domain.points = count("domain.points", 8);
    if (cfg.domain.points % 2 != 0) throw ConfigError("n_points must be even >= 8", "domain.points");
    if (has("domain.period") != has("domain.cells"))
        throw ConfigError("period and cells must be given together", has("domain.period") ? "domain.cells" : "domain.period");
    if (has("domain.period")) {
        const double p = real("domain.period");
        const std::size_t cells = count("domain.cells", 4);
        if (!(p > 0.0)) throw ConfigError("must be positive", "domain.period");
        if (std::fabs(p * static_cast<double>(cells) - cfg.domain.length) > 1e-12 * cfg.domain.length)
            throw ConfigError("domain.length must equal period * cells", "domain.length");
        if (cfg.domain.points % cells != 0 || (cfg.domain.points / cells) % 2 != 0 || cfg.domain.points / cells < 8)
            throw ConfigError("points per cell (points / cells) must be an even integer >= 8", "domain.points");
        cfg.domain.period = p;
        cfg.domain.cells = cells;
    }

    // model
    cfg.model.sigma = real("model.sigma");
    cfg.model.beta = real("model.beta");
    if (!(cfg.model.sigma >= 0.0)) throw ConfigError("model.sigma must be >= 0", "model.sigma");
    if (!(cfg.model.beta > 0.0 && cfg.model.beta <= 1.0)) throw ConfigError("model.beta must lie in (0,1]", "model.beta");

    // reaction
    {
        const auto kind = reaction_kind_from_string(req("reaction.kind"));
        if (!kind) throw ConfigError("unknown reaction kind '" + req("reaction.kind") + "'", "reaction.kind");
        cfg.reaction.kind = *kind;
        if (has("reaction.params")) cfg.reaction.params = detail::parse_list(kv["reaction.params"], "reaction.params");
        if (*kind == ReactionKind::modulated) {
            const auto inner = reaction_kind_from_string(req("reaction.inner_kind"));
            if (!inner || *inner == ReactionKind::modulated)
                throw ConfigError("inner kind must be a non-modulated catalog kind", "reaction.inner_kind");
            cfg.reaction.inner_kind = *inner;
            if (has("reaction.inner_params"))
                cfg.reaction.inner_params = detail::parse_list(kv["reaction.inner_params"], "reaction.inner_params");
            if (cfg.reaction.params.size() != 2)
                throw ConfigError("modulated expects params alpha, omega", "reaction.params");
        } else if (has("reaction.inner_kind") || has("reaction.inner_params")) {
            throw ConfigError("only valid for kind = modulated", has("reaction.inner_kind") ? "reaction.inner_kind" : "reaction.inner_params");
        }
        try {
            (void)cfg.reaction_spec();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), "reaction.params");
        }
    }

    // scheme
    {
        const auto v = split_variant_from_string(req("scheme.variant"));
        if (!v) throw ConfigError("unknown variant '" + req("scheme.variant") + "'", "scheme.variant");
        cfg.scheme.variant = *v;
        cfg.scheme.dt = real("scheme.dt");
        cfg.scheme.t_end = real("scheme.t_end");
        if (!(cfg.scheme.dt > 0.0)) throw ConfigError("must be positive", "scheme.dt");
        if (!(cfg.scheme.t_end > 0.0)) throw ConfigError("must be positive", "scheme.t_end");
        try {
            commensurate_steps(cfg.scheme.t_end, cfg.scheme.dt);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), "scheme.dt");
        }
    }

    // initial
    {
        static const std::map<std::string, InitialKind, std::less<>> kinds{
            {"constant", InitialKind::constant},           {"cosine", InitialKind::cosine},
            {"gaussian_bump", InitialKind::gaussian_bump}, {"raised_cosine_bump", InitialKind::raised_cosine_bump},
            {"peregrine_sum", InitialKind::peregrine_sum}, {"random_bounded", InitialKind::random_bounded}};
        const auto it = kinds.find(req("initial.kind"));
        if (it == kinds.end()) throw ConfigError("unknown initial kind '" + req("initial.kind") + "'", "initial.kind");
        cfg.initial.kind = it->second;
        if (has("initial.params")) cfg.initial.params = detail::parse_list(kv["initial.params"], "initial.params");
        if (has("initial.seed")) {
            try {
                std::size_t used = 0;
                const std::string& s = kv["initial.seed"];
                cfg.initial.seed = std::stoull(s, &used, 0);
                if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
            } catch (const std::exception&) {
                throw ConfigError("expected an unsigned 64-bit integer", "initial.seed");
            }
        }
        const std::size_t np = cfg.initial.params.size();
        const std::size_t m = cfg.components();
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (np < lo || np > hi)
                throw ConfigError(std::string(to_string(cfg.initial.kind)) + " expects " + std::to_string(lo) +
                                      (lo == hi ? "" : ".." + std::to_string(hi)) + " params",
                                  "initial.params");
        };
        switch (cfg.initial.kind) {
            case InitialKind::constant:
                if (np != 1 && np != m) throw ConfigError("constant expects 1 or m params", "initial.params");
                break;
            case InitialKind::cosine: need(2, 3); break;
            case InitialKind::gaussian_bump:
            case InitialKind::raised_cosine_bump:
                need(2, 3);
                if (!(cfg.initial.params[1] > 0.0)) throw ConfigError("bump width must be positive", "initial.params");
                break;
            case InitialKind::peregrine_sum:
                need(3, 3);
                if (!cfg.has_lattice()) throw ConfigError("peregrine_sum requires domain.period and domain.cells", "domain.period");
                if (!(cfg.initial.params[2] > 0.0)) throw ConfigError("bump width must be positive", "initial.params");
                break;
            case InitialKind::random_bounded:
                need(1, 1);
                if (!cfg.initial.seed) throw ConfigError("seed is mandatory for random_bounded", "initial.seed");
                if (!(cfg.initial.params[0] >= 0.0)) throw ConfigError("sup bound must be >= 0", "initial.params");
                break;
        }
    }

    // output
    if (has("output.dir")) cfg.output.dir = kv["output.dir"];
    if (has("output.stride")) cfg.output.stride = count("output.stride", 1);
    if (has("output.format")) {
        const auto& f = kv["output.format"];
        if (f == "csv") cfg.output.format = OutputFormat::csv;
        else if (f == "bin") cfg.output.format = OutputFormat::bin;
        else throw ConfigError("format must be csv or bin", "output.format");
    }

    // ode
    if (has("ode.substeps")) cfg.ode.substeps_per_unit_time = real("ode.substeps");
    if (has("ode.blowup_threshold")) cfg.ode.blowup_threshold = real("ode.blowup_threshold");
    if (has("ode.max_growth")) cfg.ode.max_substep_growth = real("ode.max_growth");
    try {
        cfg.ode.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), "ode");
    }

    // analysis
    if (has("analysis.fit_min")) cfg.analysis.fit_min = real("analysis.fit_min");
    if (has("analysis.fit_max")) cfg.analysis.fit_max = real("analysis.fit_max");
    if (has("analysis.skip_cells")) cfg.analysis.skip_cells = count("analysis.skip_cells", 0);
    if (has("analysis.outer_fraction")) {
        cfg.analysis.outer_fraction = real("analysis.outer_fraction");
        if (!(cfg.analysis.outer_fraction > 0.0 && cfg.analysis.outer_fraction <= 0.25))
            throw ConfigError("must lie in (0, 0.25]", "analysis.outer_fraction");
    }
    if (has("analysis.levels")) cfg.analysis.levels = count("analysis.levels", 3);
    if (cfg.analysis.skip_cells && cfg.has_lattice() && 2 * *cfg.analysis.skip_cells >= *cfg.domain.cells)
        throw ConfigError("2 * skip_cells must be < cells", "analysis.skip_cells");

    return cfg;
}

}  // namespace pfrd
