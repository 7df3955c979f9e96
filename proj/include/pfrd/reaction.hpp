#pragma once

// Pointwise reaction flow z' = F(t, z), integrated independently at every grid
// point with fixed-step RK4 and a per-point refinement/blow-up protocol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pfrd/grid.hpp"
#include "pfrd/parallel.hpp"

namespace pfrd {

enum class ReactionKind { quadratic, logistic, fitzhugh_nagumo, polynomial, modulated };

inline std::string_view to_string(ReactionKind k) {
    switch (k) {
        case ReactionKind::quadratic: return "quadratic";
        case ReactionKind::logistic: return "logistic";
        case ReactionKind::fitzhugh_nagumo: return "fitzhugh_nagumo";
        case ReactionKind::polynomial: return "polynomial";
        case ReactionKind::modulated: return "modulated";
    }
    return "?";
}

inline std::optional<ReactionKind> reaction_kind_from_string(std::string_view s) {
    for (auto k : {ReactionKind::quadratic, ReactionKind::logistic, ReactionKind::fitzhugh_nagumo,
                   ReactionKind::polynomial, ReactionKind::modulated})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// Closed catalog of nonlinearities.
///
///   quadratic        F(z) = z^2
///   logistic         F(z) = r z (1 - z/K)                    params (r, K)
///   fitzhugh_nagumo  F(p,q) = (p - p^3/3 - q + I, eps (p + a - b q))
///                                                            params (I, eps, a, b)
///   polynomial       F(z) = sum_k c_k z^k, deg <= 6          params (c_0, ..., c_deg)
///   modulated        F(t,z) = (1 + alpha sin(omega t)) G(z)  params (alpha, omega)
///
/// A modulated spec keeps the wrapped kind in base_kind/base_params.
class ReactionSpec {
public:
    static ReactionSpec quadratic() { return ReactionSpec(ReactionKind::quadratic, {}); }

    static ReactionSpec logistic(double r, double capacity) {
        if (!(r > 0.0) || !(capacity > 0.0)) throw std::invalid_argument("logistic needs r > 0 and K > 0");
        return ReactionSpec(ReactionKind::logistic, {r, capacity});
    }

    static ReactionSpec fitzhugh_nagumo(double current, double eps, double a, double b) {
        if (!(eps > 0.0)) throw std::invalid_argument("fitzhugh_nagumo needs eps > 0");
        return ReactionSpec(ReactionKind::fitzhugh_nagumo, {current, eps, a, b});
    }

    static ReactionSpec polynomial(std::vector<double> coefficients) {
        if (coefficients.empty() || coefficients.size() > 7)
            throw std::invalid_argument("polynomial needs 1..7 coefficients (degree <= 6)");
        return ReactionSpec(ReactionKind::polynomial, std::move(coefficients));
    }

    static ReactionSpec modulated(double alpha, double omega, const ReactionSpec& inner) {
        if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("modulated needs alpha in [0,1)");
        if (!std::isfinite(omega)) throw std::invalid_argument("modulated needs finite omega");
        if (inner.is_modulated()) throw std::invalid_argument("modulated reactions do not nest");
        ReactionSpec s = inner;
        s.alpha_ = alpha;
        s.omega_ = omega;
        s.modulated_ = true;
        return s;
    }

    /// Builds from a kind name and flat parameter list (config files).
    static ReactionSpec from_params(ReactionKind kind, const std::vector<double>& p) {
        auto need = [&](std::size_t n) {
            if (p.size() != n)
                throw std::invalid_argument(std::string(to_string(kind)) + " expects " + std::to_string(n) +
                                            " params, got " + std::to_string(p.size()));
        };
        switch (kind) {
            case ReactionKind::quadratic: need(0); return quadratic();
            case ReactionKind::logistic: need(2); return logistic(p[0], p[1]);
            case ReactionKind::fitzhugh_nagumo: need(4); return fitzhugh_nagumo(p[0], p[1], p[2], p[3]);
            case ReactionKind::polynomial: return polynomial(p);
            case ReactionKind::modulated: break;
        }
        throw std::invalid_argument("modulated reaction needs an inner kind");
    }

    ReactionKind kind() const noexcept { return modulated_ ? ReactionKind::modulated : base_kind_; }
    ReactionKind base_kind() const noexcept { return base_kind_; }
    const std::vector<double>& base_params() const noexcept { return params_; }
    bool is_modulated() const noexcept { return modulated_; }
    double alpha() const noexcept { return alpha_; }
    double omega() const noexcept { return omega_; }
    std::size_t component_count() const noexcept { return base_kind_ == ReactionKind::fitzhugh_nagumo ? 2 : 1; }

    /// out = F(t, z); no allocation, no size checks.
    void evaluate(double t, std::span<const double> z, std::span<double> out) const noexcept {
        const auto& p = params_;
        switch (base_kind_) {
            case ReactionKind::quadratic: out[0] = z[0] * z[0]; break;
            case ReactionKind::logistic: out[0] = p[0] * z[0] * (1.0 - z[0] / p[1]); break;
            case ReactionKind::fitzhugh_nagumo: {
                const double v = z[0], w = z[1];
                out[0] = v - v * v * v / 3.0 - w + p[0];
                out[1] = p[1] * (v + p[2] - p[3] * w);
                break;
            }
            case ReactionKind::polynomial: {
                double acc = 0.0;
                for (std::size_t k = p.size(); k-- > 0;) acc = acc * z[0] + p[k];
                out[0] = acc;
                break;
            }
            case ReactionKind::modulated: break;
        }
        if (modulated_) {
            const double gain = 1.0 + alpha_ * std::sin(omega_ * t);
            for (std::size_t c = 0; c < out.size(); ++c) out[c] *= gain;
        }
    }

private:
    ReactionSpec(ReactionKind kind, std::vector<double> params) : base_kind_(kind), params_(std::move(params)) {}

    ReactionKind base_kind_;
    std::vector<double> params_;
    bool modulated_ = false;
    double alpha_ = 0.0;
    double omega_ = 0.0;
};

inline std::vector<double> eval_reaction(const ReactionSpec& spec, double t, std::span<const double> z) {
    if (z.size() != spec.component_count())
        throw std::invalid_argument("state length " + std::to_string(z.size()) + " does not match reaction (m=" +
                                    std::to_string(spec.component_count()) + ")");
    std::vector<double> out(z.size());
    spec.evaluate(t, z, out);
    return out;
}

/// Certified Lipschitz constant of F on {|z| <= R} x [0, T], from analytic
/// Jacobian bounds (Frobenius norm for the two-component system).
inline double lipschitz_bound(const ReactionSpec& spec, double radius, double horizon) {
    if (!(radius > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("radius and horizon must be positive");
    const auto& p = spec.base_params();
    double bound = 0.0;
    switch (spec.base_kind()) {
        case ReactionKind::quadratic: bound = 2.0 * radius; break;
        case ReactionKind::logistic: bound = p[0] * (1.0 + 2.0 * radius / p[1]); break;
        case ReactionKind::fitzhugh_nagumo: {
            // J = [[1 - p^2, -1], [eps, -eps b]]
            const double d = std::max(1.0, radius * radius - 1.0);
            const double eps = p[1], b = p[3];
            bound = std::sqrt(d * d + 1.0 + eps * eps + eps * eps * b * b);
            break;
        }
        case ReactionKind::polynomial:
            for (std::size_t k = 1; k < p.size(); ++k)
                bound += static_cast<double>(k) * std::fabs(p[k]) * std::pow(radius, static_cast<double>(k - 1));
            break;
        case ReactionKind::modulated: break;
    }
    if (spec.is_modulated()) bound *= 1.0 + spec.alpha();
    return bound;
}

struct OdeOptions {
    double substeps_per_unit_time = 1000.0;
    double blowup_threshold = 1e8;
    double max_substep_growth = 10.0;
    int max_refinements = 20;

    void validate() const {
        if (!(substeps_per_unit_time >= 1.0) || !std::isfinite(substeps_per_unit_time))
            throw std::invalid_argument("substeps_per_unit_time must be >= 1");
        if (!(blowup_threshold > 0.0)) throw std::invalid_argument("blowup_threshold must be positive");
        if (!(max_substep_growth > 1.0)) throw std::invalid_argument("max_substep_growth must exceed 1");
        if (max_refinements < 0) throw std::invalid_argument("max_refinements must be >= 0");
    }
};

/// Result of integrating one grid point.
struct PointOutcome {
    bool blew_up = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    double peak = 0.0;  ///< max |z| over accepted substeps, including the start
};

namespace detail {

constexpr std::size_t kMaxComponents = 8;
using State = std::array<double, kMaxComponents>;

inline void rk4_step(const ReactionSpec& f, double t, double dt, std::size_t m, const State& z, State& out) {
    State k1{}, k2{}, k3{}, k4{}, tmp{};
    std::span<const double> zs(z.data(), m);
    f.evaluate(t, zs, std::span<double>(k1.data(), m));
    for (std::size_t c = 0; c < m; ++c) tmp[c] = z[c] + 0.5 * dt * k1[c];
    f.evaluate(t + 0.5 * dt, std::span<const double>(tmp.data(), m), std::span<double>(k2.data(), m));
    for (std::size_t c = 0; c < m; ++c) tmp[c] = z[c] + 0.5 * dt * k2[c];
    f.evaluate(t + 0.5 * dt, std::span<const double>(tmp.data(), m), std::span<double>(k3.data(), m));
    for (std::size_t c = 0; c < m; ++c) tmp[c] = z[c] + dt * k3[c];
    f.evaluate(t + dt, std::span<const double>(tmp.data(), m), std::span<double>(k4.data(), m));
    for (std::size_t c = 0; c < m; ++c) out[c] = z[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
}

// One substep [t, t + dt]. A step whose norm grows by more than the allowed
// factor (or turns non-finite) is split in half, up to max_refinements levels.
// Blow-up is flagged at the midpoint of the substep that crosses the
// threshold, or of the finest substep that still fails the growth test.
inline bool advance(const ReactionSpec& f, const OdeOptions& opts, double t, double dt, int level, std::size_t m,
                    State& z, PointOutcome& res) {
    State next{};
    rk4_step(f, t, dt, m, z, next);
    const double before = pointwise_norm(std::span<const double>(z.data(), m));
    const double after = pointwise_norm(std::span<const double>(next.data(), m));
    const bool bad = !std::isfinite(after) || after > opts.max_substep_growth * std::max(before, 1.0);
    if (bad) {
        if (level < opts.max_refinements) {
            const double half = 0.5 * dt;
            if (!advance(f, opts, t, half, level + 1, m, z, res)) return false;
            return advance(f, opts, t + half, half, level + 1, m, z, res);
        }
        res.blew_up = true;
        res.blowup_time = t + 0.5 * dt;
        return false;
    }
    if (after > opts.blowup_threshold) {
        res.blew_up = true;
        res.blowup_time = t + 0.5 * dt;
        return false;
    }
    z = next;
    res.peak = std::max(res.peak, after);
    return true;
}

}  // namespace detail

/// Number of fixed RK4 substeps used for a stage of the given duration.
inline std::size_t substep_count(double duration, const OdeOptions& opts) {
    const double raw = duration * opts.substeps_per_unit_time;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

/// Integrates z' = F(t, z) from t0 to t1 in place. Depends only on its
/// arguments, so equal inputs give equal bits wherever it is called.
inline PointOutcome integrate_point(const ReactionSpec& f, double t0, double t1, std::span<double> z,
                                    const OdeOptions& opts) {
    const std::size_t m = z.size();
    if (m > detail::kMaxComponents) throw std::invalid_argument("too many components");
    detail::State state{};
    std::copy(z.begin(), z.end(), state.begin());
    PointOutcome res;
    res.peak = pointwise_norm(z);
    if (t1 > t0) {
        const std::size_t n = substep_count(t1 - t0, opts);
        const double dt = (t1 - t0) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t0 + static_cast<double>(i) * dt;
            if (!detail::advance(f, opts, t, dt, 0, m, state, res)) return res;
        }
    }
    std::copy(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(m), z.begin());
    return res;
}

enum class FlowStatus { completed, blew_up };

inline std::string_view to_string(FlowStatus s) { return s == FlowStatus::completed ? "completed" : "blew_up"; }

class FlowOutcome {
public:
    static FlowOutcome completed(Field f, double peak) { return FlowOutcome(FlowStatus::completed, std::move(f), 0.0, peak); }
    static FlowOutcome blew_up(double t_star, double peak) {
        return FlowOutcome(FlowStatus::blew_up, std::nullopt, t_star, peak);
    }

    FlowStatus status() const noexcept { return status_; }
    bool ok() const noexcept { return status_ == FlowStatus::completed; }

    const Field& field() const {
        if (!field_) throw std::logic_error("flow blew up; no field available");
        return *field_;
    }
    double blowup_time_estimate() const {
        if (ok()) throw std::logic_error("flow completed; no blow-up time");
        return t_star_;
    }
    /// Largest pointwise norm seen along accepted substeps (all points).
    double peak_sup() const noexcept { return peak_; }

private:
    FlowOutcome(FlowStatus s, std::optional<Field> f, double t_star, double peak)
        : status_(s), field_(std::move(f)), t_star_(t_star), peak_(peak) {}

    FlowStatus status_;
    std::optional<Field> field_;
    double t_star_;
    double peak_;
};

/// N(t, t0, u0): pointwise flow of every grid point from t0 to t. On blow-up the
/// earliest per-point estimate is reported.
inline FlowOutcome flow(const ReactionSpec& spec, double t, double t0, const Field& u0, const OdeOptions& opts) {
    opts.validate();
    if (!(t >= t0)) throw std::invalid_argument("flow requires t >= t0");
    const std::size_t m = u0.grid().components();
    if (m != spec.component_count())
        throw std::invalid_argument("field has " + std::to_string(m) + " components, reaction expects " +
                                    std::to_string(spec.component_count()));
    const std::size_t n = u0.grid().n_points();
    std::vector<double> values(u0.values().begin(), u0.values().end());
    std::vector<PointOutcome> results(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            results[k] = integrate_point(spec, t0, t, std::span<double>(values).subspan(k * m, m), opts);
    });
    double peak = 0.0;
    double t_star = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        peak = std::max(peak, r.peak);
        if (r.blew_up) t_star = std::min(t_star, r.blowup_time);
    }
    if (std::isfinite(t_star)) return FlowOutcome::blew_up(t_star, peak);
    return FlowOutcome::completed(Field(u0.grid(), t, std::move(values)), peak);
}

struct GronwallReport {
    bool holds = true;
    double lipschitz = 0.0;
    double radius = 0.0;
    double max_excess = 0.0;  ///< max over points of lhs - rhs (<= 0 when holds, before slack)
};

/// Checks |N(u0) - N(v0)|(x) <= exp(L (t - t0)) |u0 - v0|(x) + slack at every
/// point, with L certified on the largest radius either trajectory reached.
inline GronwallReport flow_difference_bound_check(const ReactionSpec& spec, double t, double t0, const Field& u0,
                                                  const Field& v0, const OdeOptions& opts, double slack = 1e-8) {
    if (!u0.grid().same_as(v0.grid())) throw std::invalid_argument("grid mismatch");
    const FlowOutcome a = flow(spec, t, t0, u0, opts);
    const FlowOutcome b = flow(spec, t, t0, v0, opts);
    if (!a.ok() || !b.ok()) throw NumericError("flow blew up before the comparison time");
    GronwallReport rep;
    rep.radius = std::max({a.peak_sup(), b.peak_sup(), std::numeric_limits<double>::min()});
    rep.lipschitz = lipschitz_bound(spec, rep.radius, std::max(t, std::numeric_limits<double>::min()));
    const double growth = std::exp(rep.lipschitz * (t - t0));
    const std::size_t m = u0.grid().components();
    std::vector<double> d0(m), d1(m);
    rep.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u0.grid().n_points(); ++k) {
        for (std::size_t c = 0; c < m; ++c) {
            d0[c] = u0(k, c) - v0(k, c);
            d1[c] = a.field()(k, c) - b.field()(k, c);
        }
        const double excess = pointwise_norm(d1) - growth * pointwise_norm(d0);
        rep.max_excess = std::max(rep.max_excess, excess);
    }
    rep.holds = rep.max_excess <= slack;
    return rep;
}

}  // namespace pfrd
