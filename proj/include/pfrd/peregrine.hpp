#pragma once

// Lattice-periodic plus decaying decomposition u = v + w on a box of N cells.
//
// v lives on one cell (period P) and evolves by itself; w lives on the box
// (length N P) and obeys the equation with nonlinearity F(v + w) - F(v). The
// reaction stage integrates, at every box point, the pair (v, u = v + w); both
// halves use the same per-point integrator as the monolithic solver, so
// lift(v) + w reproduces the monolithic iterate up to one rounding per stage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfrd/grid.hpp"
#include "pfrd/kernel.hpp"
#include "pfrd/reaction.hpp"
#include "pfrd/splitting.hpp"

namespace pfrd {

struct LatticeSpec {
    double period = 1.0;          ///< P
    std::size_t box_cells = 16;   ///< N, box length L = N P
    std::size_t cell_points = 64; ///< samples per cell

    void validate() const {
        if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("period must be positive");
        if (box_cells < 4) throw std::invalid_argument("box_cells must be >= 4");
        if (cell_points < 8 || cell_points % 2 != 0) throw std::invalid_argument("cell_points must be even >= 8");
    }

    double box_length() const noexcept { return period * static_cast<double>(box_cells); }
    std::size_t box_points() const noexcept { return box_cells * cell_points; }

    GridSpec cell_grid(std::size_t m = 1) const {
        validate();
        return make_grid(cell_points, period, m);
    }
    GridSpec box_grid(std::size_t m = 1) const {
        validate();
        return make_grid(box_points(), box_length(), m);
    }
};

namespace detail {

inline bool spacing_matches(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(a, b); }

inline void check_cell(const Field& v, const LatticeSpec& lat) {
    if (v.grid().n_points() != lat.cell_points || !spacing_matches(v.grid().length(), lat.period))
        throw std::invalid_argument("field is not on the lattice cell grid");
}

inline void check_box(const Field& u, const LatticeSpec& lat) {
    if (u.grid().n_points() != lat.box_points() || !spacing_matches(u.grid().length(), lat.box_length()))
        throw std::invalid_argument("field is not on the lattice box grid");
}

}  // namespace detail

/// Tiles a cell field N times over the box (exact copies).
inline Field lift_periodic(const Field& v, const LatticeSpec& lat) {
    lat.validate();
    detail::check_cell(v, lat);
    const std::size_t m = v.grid().components();
    std::vector<double> out;
    out.reserve(lat.box_points() * m);
    for (std::size_t cell = 0; cell < lat.box_cells; ++cell) out.insert(out.end(), v.values().begin(), v.values().end());
    return Field(lat.box_grid(m), v.time(), std::move(out));
}

/// Samples of cell `cell` of a box field, as a cell field.
inline Field restrict_cell(const Field& u, const LatticeSpec& lat, std::size_t cell) {
    lat.validate();
    detail::check_box(u, lat);
    if (cell >= lat.box_cells) throw std::out_of_range("cell index out of range");
    const std::size_t m = u.grid().components();
    auto first = u.values().begin() + static_cast<std::ptrdiff_t>(cell * lat.cell_points * m);
    return Field(lat.cell_grid(m), u.time(), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(lat.cell_points * m)));
}

/// Cell whose centre is nearest the centre of mass of `weight` (per box point),
/// ties toward the lower index. Returns the position as well.
inline std::size_t center_cell(const std::vector<double>& weight, const LatticeSpec& lat, double* com = nullptr) {
    const double dx = lat.period / static_cast<double>(lat.cell_points);
    double mass = 0.0, moment = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) {
        mass += weight[k];
        moment += weight[k] * static_cast<double>(k) * dx;
    }
    const double x = mass > 0.0 ? moment / mass : 0.5 * lat.box_length();
    if (com) *com = x;
    const auto cell = static_cast<std::size_t>(std::floor(x / lat.period));
    return std::min(cell, lat.box_cells - 1);
}

/// The `skip` cells nearest position x (by cell-centre distance on the
/// periodic box; ties toward the lower index).
inline std::vector<std::size_t> nearest_cells(double x, const LatticeSpec& lat, std::size_t skip) {
    const double L = lat.box_length();
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t c = 0; c < lat.box_cells; ++c) {
        const double centre = (static_cast<double>(c) + 0.5) * lat.period;
        double d = std::fabs(centre - x);
        d = std::min(d, L - d);
        order.emplace_back(d, c);
    }
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < skip; ++i) out.push_back(order[i].second);
    return out;
}

/// Estimates the periodic part of a box field by averaging each in-cell offset
/// over every cell except the `skip` cells nearest the localized part. The
/// localized part is located as the centre of mass of |u - cell mean|.
inline Field project_periodic(const Field& u, const LatticeSpec& lat, std::size_t skip) {
    lat.validate();
    detail::check_box(u, lat);
    if (2 * skip >= lat.box_cells) throw std::invalid_argument("2 * skip_cells must be < box_cells");
    const std::size_t m = u.grid().components();
    const std::size_t cp = lat.cell_points;

    std::vector<double> mean(cp * m, 0.0);
    for (std::size_t cell = 0; cell < lat.box_cells; ++cell)
        for (std::size_t i = 0; i < cp * m; ++i) mean[i] += u.values()[cell * cp * m + i];
    for (double& x : mean) x /= static_cast<double>(lat.box_cells);

    std::vector<double> deviation(lat.box_points());
    std::vector<double> d(m);
    for (std::size_t k = 0; k < lat.box_points(); ++k) {
        for (std::size_t c = 0; c < m; ++c) d[c] = u(k, c) - mean[(k % cp) * m + c];
        deviation[k] = pointwise_norm(d);
    }
    double com = 0.0;
    center_cell(deviation, lat, &com);
    const auto skipped = nearest_cells(com, lat, skip);

    std::vector<double> acc(cp * m, 0.0);
    std::size_t used = 0;
    for (std::size_t cell = 0; cell < lat.box_cells; ++cell) {
        if (std::find(skipped.begin(), skipped.end(), cell) != skipped.end()) continue;
        for (std::size_t i = 0; i < cp * m; ++i) acc[i] += u.values()[cell * cp * m + i];
        ++used;
    }
    for (double& x : acc) x /= static_cast<double>(used);
    return Field(lat.cell_grid(m), u.time(), std::move(acc));
}

struct ProjectorReport {
    bool holds = true;
    double projected_sup = 0.0;
    double input_sup = 0.0;
};

inline ProjectorReport projector_contraction_check(const Field& u, const LatticeSpec& lat, std::size_t skip,
                                                   double slack = 1e-12) {
    ProjectorReport r;
    r.projected_sup = sup_norm(project_periodic(u, lat, skip));
    r.input_sup = sup_norm(u);
    r.holds = r.projected_sup <= r.input_sup + slack;
    return r;
}

struct PeregrineState {
    Field v;  ///< periodic part on the cell grid
    Field w;  ///< decaying part on the box grid

    double time() const noexcept { return v.time(); }
};

inline PeregrineState make_peregrine_state(Field v, Field w, const LatticeSpec& lat) {
    detail::check_cell(v, lat);
    detail::check_box(w, lat);
    if (v.time() != w.time()) throw std::invalid_argument("v and w carry different times");
    if (v.grid().components() != w.grid().components()) throw std::invalid_argument("component mismatch");
    return PeregrineState{std::move(v), std::move(w)};
}

/// lift(v) + w.
inline Field recombine(const PeregrineState& s, const LatticeSpec& lat) {
    const Field lv = lift_periodic(s.v, lat);
    std::vector<double> out(lv.values().begin(), lv.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.w.values()[i];
    return Field(lv.grid(), s.w.time(), std::move(out));
}

struct CoupledReport {
    FlowStatus status = FlowStatus::completed;
    std::vector<PeregrineState> snapshots;  ///< initial, every stride-th step, final
    std::string blowup_component;           ///< "v" or "w" when blew_up
    double t_star_estimate = std::numeric_limits<double>::quiet_NaN();
    std::size_t step_count = 0;

    bool ok() const noexcept { return status == FlowStatus::completed; }
};

namespace detail {

struct CoupledReaction {
    std::optional<PeregrineState> state;
    std::string failed;
    double t_star = std::numeric_limits<double>::quiet_NaN();
};

// Reaction stage on (v, w) over [r0, r1]. The cell copy of v and the box copy
// (read from lift(v) at each point) run the same integrator on the same
// inputs; the box copy is checked against the lifted cell result.
inline CoupledReaction coupled_reaction(const Field& v, const Field& w, double r0, double r1,
                                        const ReactionSpec& reaction, const OdeOptions& opts,
                                        const LatticeSpec& lat) {
    CoupledReaction out;
    FlowOutcome cell = flow(reaction, r1, r0, v, opts);

    const std::size_t m = w.grid().components();
    const Field lv = lift_periodic(v, lat);
    const std::size_t n = lat.box_points();
    std::vector<double> vz(lv.values().begin(), lv.values().end());
    std::vector<double> uz(vz);
    for (std::size_t i = 0; i < uz.size(); ++i) uz[i] += w.values()[i];
    std::vector<PointOutcome> rv(n), ru(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            rv[k] = integrate_point(reaction, r0, r1, std::span<double>(vz).subspan(k * m, m), opts);
            ru[k] = integrate_point(reaction, r0, r1, std::span<double>(uz).subspan(k * m, m), opts);
        }
    });

    if (!cell.ok()) {
        out.failed = "v";
        out.t_star = cell.blowup_time_estimate();
        return out;
    }
    double t_star = std::numeric_limits<double>::infinity();
    for (const auto& r : ru)
        if (r.blew_up) t_star = std::min(t_star, r.blowup_time);
    if (std::isfinite(t_star)) {
        out.failed = "w";
        out.t_star = t_star;
        return out;
    }
    const Field lifted = lift_periodic(cell.field(), lat);
    if (!std::equal(vz.begin(), vz.end(), lifted.values().begin()))
        throw std::logic_error("box and cell copies of the periodic part diverged");
    std::vector<double> wz(uz.size());
    for (std::size_t i = 0; i < wz.size(); ++i) wz[i] = uz[i] - vz[i];
    out.state = PeregrineState{cell.field().with_time(r1), Field(w.grid(), r1, std::move(wz))};
    return out;
}

}  // namespace detail

/// Evolves (v, w) with the given splitting scheme over horizon T.
inline CoupledReport evolve_coupled(const PeregrineState& state, const LatticeSpec& lat, double horizon,
                                    const SplitScheme& scheme, const DiffusionParams& params,
                                    const ReactionSpec& reaction, const OdeOptions& opts, std::size_t stride = 1) {
    lat.validate();
    scheme.validate();
    params.validate();
    opts.validate();
    make_peregrine_state(state.v, state.w, lat);
    if (stride == 0) throw std::invalid_argument("stride must be >= 1");
    const std::size_t n = commensurate_steps(horizon, scheme.h);
    const double h = horizon / static_cast<double>(n);
    const double t0 = state.time();

    CoupledReport rep;
    rep.snapshots.push_back(state);
    Field v = state.v, w = state.w;
    for (std::size_t k = 0; k < n; ++k) {
        const double t_k = t0 + static_cast<double>(k) * h;
        const double t_next = k + 1 == n ? t0 + horizon : t0 + static_cast<double>(k + 1) * h;
        const double hk = t_next - t_k;
        const auto [pre, post] = diffusion_split(scheme.variant, hk);
        const auto [r0, r1] = reaction_window(scheme.variant, t_k, hk);

        v = apply_semigroup(v, params, pre);
        w = apply_semigroup(w, params, pre);
        auto r = detail::coupled_reaction(v, w, r0, r1, reaction, opts, lat);
        rep.step_count = k + 1;
        if (!r.state) {
            rep.status = FlowStatus::blew_up;
            rep.blowup_component = r.failed;
            rep.t_star_estimate = r.t_star;
            return rep;
        }
        v = r.state->v;
        w = r.state->w;
        if (post > 0.0) {
            v = apply_semigroup(v, params, post);
            w = apply_semigroup(w, params, post);
        }
        v = v.with_time(t_next);
        w = w.with_time(t_next);
        if ((k + 1) % stride == 0 || k + 1 == n) rep.snapshots.push_back(PeregrineState{v, w});
    }
    return rep;
}

struct DecayReport {
    double outer_fraction = 0.1;
    double outer_sup = 0.0;  ///< sup |w| over the first and last outer_fraction of the box
    double inner_sup = 0.0;  ///< sup |w| elsewhere
};

inline DecayReport decay_report(const Field& w, double outer_fraction) {
    if (!(outer_fraction > 0.0 && outer_fraction <= 0.25))
        throw std::invalid_argument("outer_fraction must lie in (0, 0.25]");
    const std::size_t n = w.grid().n_points();
    const auto edge = static_cast<std::size_t>(std::ceil(outer_fraction * static_cast<double>(n)));
    DecayReport r;
    r.outer_fraction = outer_fraction;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = pointwise_norm(w.point(k));
        if (k < edge || k >= n - edge)
            r.outer_sup = std::max(r.outer_sup, a);
        else
            r.inner_sup = std::max(r.inner_sup, a);
    }
    return r;
}

inline DecayReport decay_report(const PeregrineState& s, double outer_fraction) {
    return decay_report(s.w, outer_fraction);
}

}  // namespace pfrd
