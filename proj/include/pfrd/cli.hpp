#pragma once

// The four subcommands (simulate, kernel, decompose, converge) and the exit
// status contract:
//
//   0  run completed (blow-up included: status "blew_up" in the manifest)
//   2  configuration error
//   3  runtime numeric error
//
// Every run writes <out>/manifest.json with the full configuration, tool
// version, status and wall-clock time. Errors are reported as one JSON line on
// the error stream: {"error": "config"|"numeric", "path": ..., "message": ...}.

#include <chrono>
#include <cstddef>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfrd/config.hpp"
#include "pfrd/error.hpp"
#include "pfrd/kernel.hpp"
#include "pfrd/peregrine.hpp"
#include "pfrd/presets.hpp"
#include "pfrd/snapshot.hpp"
#include "pfrd/splitting.hpp"
#include "pfrd/version.hpp"

namespace pfrd {

enum ExitStatus : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3 };

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

using nlohmann::json;

inline json config_json(const RunConfig& cfg) {
    json j = json::object();
    for (const auto& [path, value] : cfg.raw) {
        const auto dot = path.find('.');
        j[path.substr(0, dot)][path.substr(dot + 1)] = value;
    }
    return j;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

inline std::string csv_real(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    write_atomically(path, [&](std::ostream& os) { os << text; });
}

inline void write_field(const std::filesystem::path& path, const Field& f, OutputFormat fmt) {
    if (fmt == OutputFormat::bin)
        write_atomically(path, [&](std::ostream& os) { write_binary(os, f); }, true);
    else
        write_atomically(path, [&](std::ostream& os) { write_csv(os, f); });
}

struct RunContext {
    const RunConfig& cfg;
    std::filesystem::path out;
    json manifest;
};

inline void run_simulate(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const InitialData init = build_initial(cfg);
    const SolveReport rep = evolve(init.u, cfg.scheme.t_end, cfg.split_scheme(), cfg.model, cfg.reaction_spec(),
                                   cfg.ode, cfg.output.stride);
    const auto dir = ctx.out / "snapshots";
    std::filesystem::create_directories(dir);
    const std::string ext = cfg.output.format == OutputFormat::bin ? ".bin" : ".csv";
    std::ostringstream index;
    index << "index,time,sup_norm,file\n";
    for (std::size_t i = 0; i < rep.snapshots.size(); ++i) {
        std::ostringstream name;
        name << "snap_" << std::setw(6) << std::setfill('0') << i << ext;
        write_field(dir / name.str(), rep.snapshots[i].field, cfg.output.format);
        index << i << "," << csv_real(rep.snapshots[i].time) << "," << csv_real(sup_norm(rep.snapshots[i].field))
              << ",snapshots/" << name.str() << "\n";
    }
    write_text(ctx.out / "snapshots.csv", index.str());
    ctx.manifest["status"] = std::string(to_string(rep.status));
    ctx.manifest["step_count"] = rep.step_count;
    ctx.manifest["snapshot_count"] = rep.snapshots.size();
    if (rep.ok())
        ctx.manifest["final_sup_norm"] = sup_norm(*rep.final);
    else
        ctx.manifest["t_star"] = rep.t_star_estimate;
}

inline void run_kernel(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const GridSpec grid = make_grid(cfg.domain.points, cfg.domain.length, 1);
    const double t = cfg.scheme.t_end;
    const KernelSample ks = synthesize_kernel(grid, cfg.model, t);
    const bool closed = cfg.model.beta == 1.0 || cfg.model.beta == 0.5;
    const double sigma_t = cfg.model.sigma * t;

    std::ostringstream csv;
    csv << "x,value" << (closed ? ",closed_form" : "") << "\n";
    const std::size_t n = grid.n_points();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (i + n / 2) % n;  // ascending x from -L/2
        const double x = ks.centered_x(k);
        csv << csv_real(x) << "," << csv_real(ks.values[k]);
        if (closed) csv << "," << csv_real(closed_form_kernel(cfg.model.beta, sigma_t, x));
        csv << "\n";
    }
    write_text(ctx.out / "kernel.csv", csv.str());

    const double lo = cfg.analysis.fit_min.value_or(grid.length() / 40.0);
    const double hi = cfg.analysis.fit_max.value_or(grid.length() / 10.0);
    const double slope = tail_exponent(ks, lo, hi);
    std::ostringstream fit;
    fit << "fit_min,fit_max,slope,mass,min_value\n"
        << csv_real(lo) << "," << csv_real(hi) << "," << csv_real(slope) << "," << csv_real(ks.mass()) << ","
        << csv_real(ks.min_value()) << "\n";
    write_text(ctx.out / "tail_fit.csv", fit.str());
    ctx.manifest["status"] = "completed";
    ctx.manifest["tail_slope"] = slope;
    ctx.manifest["mass"] = ks.mass();
    ctx.manifest["min_value"] = ks.min_value();
}

inline void run_decompose(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.initial.kind != InitialKind::peregrine_sum)
        throw ConfigError("decompose requires initial.kind = peregrine_sum", "initial.kind");
    const LatticeSpec lat = cfg.lattice();
    const InitialData init = build_initial(cfg);
    const std::size_t skip = cfg.analysis.skip_cells.value_or(lat.box_cells / 2 - 2);
    const double outer = cfg.analysis.outer_fraction;
    const auto reaction = cfg.reaction_spec();

    const CoupledReport coupled = evolve_coupled(*init.decomposition, lat, cfg.scheme.t_end, cfg.split_scheme(),
                                                 cfg.model, reaction, cfg.ode, cfg.output.stride);
    const SolveReport mono =
        evolve(init.u, cfg.scheme.t_end, cfg.split_scheme(), cfg.model, reaction, cfg.ode, cfg.output.stride);
    const SolveReport periodic = evolve(init.decomposition->v, cfg.scheme.t_end, cfg.split_scheme(), cfg.model,
                                        reaction, cfg.ode, cfg.output.stride);

    std::ostringstream csv;
    csv << "time,sum_consistency_error,outer_sup_w,projector_error\n";
    const std::size_t rows = std::min(coupled.snapshots.size(), mono.snapshots.size());
    double worst_sum = 0.0;
    bool v_bitwise = true;
    for (std::size_t i = 0; i < rows; ++i) {
        const PeregrineState& s = coupled.snapshots[i];
        const Field& u = mono.snapshots[i].field;
        const double sum_err = sup_distance(recombine(s, lat), u);
        const double outer_sup = decay_report(s, outer).outer_sup;
        const double proj_err = sup_distance(project_periodic(u, lat, skip), s.v);
        worst_sum = std::max(worst_sum, sum_err);
        if (i < periodic.snapshots.size())
            v_bitwise = v_bitwise && s.v.values().size() == periodic.snapshots[i].field.values().size() &&
                        std::equal(s.v.values().begin(), s.v.values().end(),
                                   periodic.snapshots[i].field.values().begin());
        csv << csv_real(s.time()) << "," << csv_real(sum_err) << "," << csv_real(outer_sup) << ","
            << csv_real(proj_err) << "\n";
    }
    write_text(ctx.out / "decompose.csv", csv.str());
    ctx.manifest["status"] = std::string(to_string(coupled.ok() && mono.ok() ? FlowStatus::completed : FlowStatus::blew_up));
    ctx.manifest["step_count"] = coupled.step_count;
    ctx.manifest["skip_cells"] = skip;
    ctx.manifest["max_sum_consistency_error"] = worst_sum;
    ctx.manifest["periodic_part_bitwise"] = v_bitwise;
    if (!coupled.ok()) {
        ctx.manifest["blowup_component"] = coupled.blowup_component;
        ctx.manifest["t_star"] = coupled.t_star_estimate;
    }
    if (!mono.ok()) ctx.manifest["monolithic_t_star"] = mono.t_star_estimate;
}

inline void run_converge(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const InitialData init = build_initial(cfg);
    std::vector<double> hs;
    for (std::size_t i = 0; i < cfg.analysis.levels; ++i)
        hs.push_back(cfg.scheme.dt / static_cast<double>(std::size_t{1} << i));
    const OrderFit fit = estimate_order(init.u, cfg.scheme.t_end, cfg.model, cfg.reaction_spec(), cfg.scheme.variant,
                                        hs, cfg.ode);
    std::ostringstream csv;
    csv << "h,sup_error,slope\n";
    for (std::size_t i = 0; i < fit.step_sizes.size(); ++i)
        csv << csv_real(fit.step_sizes[i]) << "," << csv_real(fit.errors[i]) << ","
            << (fit.exact ? std::string("exact") : csv_real(fit.slope)) << "\n";
    write_text(ctx.out / "converge.csv", csv.str());
    ctx.manifest["status"] = "completed";
    ctx.manifest["variant"] = std::string(to_string(cfg.scheme.variant));
    ctx.manifest["exact"] = fit.exact;
    if (!fit.exact) ctx.manifest["slope"] = fit.slope;
}

}  // namespace detail

inline const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"simulate", "kernel", "decompose", "converge"};
    return names;
}

/// Runs one subcommand, writing artifacts and manifest.json under `out`.
/// Throws on configuration or numeric errors; blow-up is a normal return.
inline void run_subcommand(std::string_view name, const RunConfig& cfg, const std::filesystem::path& out) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out);
    detail::RunContext ctx{cfg, out, nlohmann::json::object()};
    ctx.manifest["tool"] = "pfrd";
    ctx.manifest["version"] = PFRD_VERSION_STRING;
    ctx.manifest["subcommand"] = std::string(name);
    ctx.manifest["started_at"] = detail::utc_now();
    ctx.manifest["config"] = detail::config_json(cfg);

    if (name == "simulate") detail::run_simulate(ctx);
    else if (name == "kernel") detail::run_kernel(ctx);
    else if (name == "decompose") detail::run_decompose(ctx);
    else if (name == "converge") detail::run_converge(ctx);
    else throw ConfigError("unknown subcommand '" + std::string(name) + "'");

    ctx.manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail::write_text(out / "manifest.json", ctx.manifest.dump(2) + "\n");
}

/// Parses the config file, applies overrides and runs; maps failures to the
/// exit status contract and reports them as one JSON line on `err`.
inline int run_guarded(std::string_view name, const std::filesystem::path& config_path,
                       const std::optional<std::filesystem::path>& out_override,
                       std::optional<std::size_t> stride_override, std::ostream& err) {
    auto report = [&](const char* kind, const std::string& path, const std::string& message) {
        nlohmann::json j{{"error", kind}, {"message", message}};
        if (!path.empty()) j["path"] = path;
        err << j.dump() << std::endl;
    };
    try {
        RunConfig cfg = parse_config(read_text_file(config_path));
        if (out_override) cfg.output.dir = out_override->string();
        if (stride_override) {
            if (*stride_override == 0) throw ConfigError("stride must be >= 1", "output.stride");
            cfg.output.stride = *stride_override;
        }
        run_subcommand(name, cfg, cfg.output.dir);
        return kExitOk;
    } catch (const ConfigError& e) {
        report("config", e.path(), e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        report("config", "", e.what());
        return kExitConfig;
    } catch (const std::domain_error& e) {
        report("config", "", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        report("numeric", "", e.what());
        return kExitNumeric;
    }
}

}  // namespace pfrd
