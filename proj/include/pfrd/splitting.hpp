#pragma once

// Operator splitting of u_t + sigma (-Delta)^beta u = F(t, u) into the exact
// diffusion semigroup and the pointwise reaction flow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pfrd/grid.hpp"
#include "pfrd/kernel.hpp"
#include "pfrd/reaction.hpp"

namespace pfrd {

/// lie_paper:  V = S(h) U_k;  U_{k+1} = N(t_k + h, t_k + h/2, V)
/// lie_full:   V = S(h) U_k;  U_{k+1} = N(t_k + h, t_k, V)
/// strang:     U_{k+1} = S(h/2) N(t_k + h, t_k, S(h/2) U_k)
enum class SplitVariant { lie_paper, lie_full, strang };

inline std::string_view to_string(SplitVariant v) {
    switch (v) {
        case SplitVariant::lie_paper: return "lie_paper";
        case SplitVariant::lie_full: return "lie_full";
        case SplitVariant::strang: return "strang";
    }
    return "?";
}

inline std::optional<SplitVariant> split_variant_from_string(std::string_view s) {
    for (auto v : {SplitVariant::lie_paper, SplitVariant::lie_full, SplitVariant::strang})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

struct SplitScheme {
    SplitVariant variant = SplitVariant::lie_full;
    double h = 1e-3;

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step size must be positive");
    }
};

/// Time window of the reaction stage inside a step [t_k, t_k + h].
inline std::pair<double, double> reaction_window(SplitVariant v, double t_k, double h) {
    if (v == SplitVariant::lie_paper) return {t_k + 0.5 * h, t_k + h};
    return {t_k, t_k + h};
}

/// Diffusion durations applied before and after the reaction stage.
inline std::pair<double, double> diffusion_split(SplitVariant v, double h) {
    if (v == SplitVariant::strang) return {0.5 * h, 0.5 * h};
    return {h, 0.0};
}

/// One splitting step from t_k to t_next (normally t_k + h).
inline FlowOutcome step_between(const Field& u, double t_k, double t_next, SplitVariant variant,
                                const DiffusionParams& params, const ReactionSpec& reaction, const OdeOptions& opts) {
    const double h = t_next - t_k;
    const auto [pre, post] = diffusion_split(variant, h);
    const auto [r0, r1] = reaction_window(variant, t_k, h);
    Field v = apply_semigroup(u, params, pre);
    FlowOutcome r = flow(reaction, r1, r0, v, opts);
    if (!r.ok()) return r;
    Field out = post > 0.0 ? apply_semigroup(r.field(), params, post) : r.field();
    return FlowOutcome::completed(out.with_time(t_next), r.peak_sup());
}

/// One step of length scheme.h starting at u.time().
inline FlowOutcome step(const Field& u, const SplitScheme& scheme, const DiffusionParams& params,
                        const ReactionSpec& reaction, const OdeOptions& opts) {
    scheme.validate();
    return step_between(u, u.time(), u.time() + scheme.h, scheme.variant, params, reaction, opts);
}

/// Number of steps for horizon T at nominal step h; T/h must be within 1% of
/// an integer. The step actually used is T / count.
inline std::size_t commensurate_steps(double horizon, double h) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    const double ratio = horizon / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::fabs(ratio - n) > 0.01)
        throw std::invalid_argument("T/h = " + std::to_string(ratio) + " is not within 1% of an integer");
    return static_cast<std::size_t>(n);
}

struct Snapshot {
    double time;
    Field field;
};

struct SolveReport {
    FlowStatus status = FlowStatus::completed;
    std::vector<Snapshot> snapshots;
    std::optional<Field> final;
    double t_star_estimate = std::numeric_limits<double>::quiet_NaN();
    std::size_t step_count = 0;

    bool ok() const noexcept { return status == FlowStatus::completed; }
};

/// Iterates the splitting step from u0.time() over a horizon T. Snapshots are
/// the initial field, every `stride`-th step, and the final field.
inline SolveReport evolve(const Field& u0, double horizon, const SplitScheme& scheme, const DiffusionParams& params,
                          const ReactionSpec& reaction, const OdeOptions& opts, std::size_t stride = 1) {
    scheme.validate();
    params.validate();
    opts.validate();
    if (stride == 0) throw std::invalid_argument("stride must be >= 1");
    const std::size_t n = commensurate_steps(horizon, scheme.h);
    const double h = horizon / static_cast<double>(n);
    const double t0 = u0.time();

    SolveReport rep;
    rep.snapshots.push_back({t0, u0});
    Field u = u0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t_k = t0 + static_cast<double>(k) * h;
        const double t_next = k + 1 == n ? t0 + horizon : t0 + static_cast<double>(k + 1) * h;
        FlowOutcome r = step_between(u, t_k, t_next, scheme.variant, params, reaction, opts);
        rep.step_count = k + 1;
        if (!r.ok()) {
            rep.status = FlowStatus::blew_up;
            rep.t_star_estimate = r.blowup_time_estimate();
            return rep;
        }
        u = r.field();
        if ((k + 1) % stride == 0 || k + 1 == n) rep.snapshots.push_back({u.time(), u});
    }
    rep.final = u;
    return rep;
}

/// Fine-step Strang solution used as the stand-in for the exact mild solution.
inline Field reference_solution(const Field& u0, double horizon, const DiffusionParams& params,
                                const ReactionSpec& reaction, const OdeOptions& opts, double h_ref) {
    SolveReport r = evolve(u0, horizon, SplitScheme{SplitVariant::strang, h_ref}, params, reaction, opts,
                           std::numeric_limits<std::size_t>::max());
    if (!r.ok()) throw NumericError("reference solution blew up at t ~ " + std::to_string(r.t_star_estimate));
    return *r.final;
}

struct OrderFit {
    std::vector<double> step_sizes;
    std::vector<double> errors;
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool exact = false;  ///< all errors at roundoff; no slope fitted
};

/// Empirical convergence order: slope of log(sup error vs reference) against
/// log h. The reference uses Strang with min(h_list) / reference_refinement.
inline OrderFit estimate_order(const Field& u0, double horizon, const DiffusionParams& params,
                               const ReactionSpec& reaction, SplitVariant variant, const std::vector<double>& h_list,
                               const OdeOptions& opts, double reference_refinement = 64.0) {
    if (h_list.size() < 3) throw std::invalid_argument("estimate_order needs at least 3 step sizes");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1])) throw std::invalid_argument("step sizes must be decreasing");
    for (double h : h_list) commensurate_steps(horizon, h);

    const double h_ref = h_list.back() / reference_refinement;
    const Field ref = reference_solution(u0, horizon, params, reaction, opts, h_ref);

    OrderFit fit;
    for (double h : h_list) {
        SolveReport r = evolve(u0, horizon, SplitScheme{variant, h}, params, reaction, opts,
                               std::numeric_limits<std::size_t>::max());
        if (!r.ok()) throw NumericError("blow-up before T at h = " + std::to_string(h));
        fit.step_sizes.push_back(h);
        fit.errors.push_back(sup_distance(*r.final, ref));
    }
    const double scale = std::max(1.0, sup_norm(ref));
    const double roundoff = 1e-12 * scale;
    if (*std::max_element(fit.errors.begin(), fit.errors.end()) <= roundoff) {
        fit.exact = true;
        return fit;
    }
    fit.slope = loglog_slope(fit.step_sizes, fit.errors);
    return fit;
}

}  // namespace pfrd
