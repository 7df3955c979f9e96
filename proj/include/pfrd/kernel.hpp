#pragma once

// Fractional diffusion semigroup S(t) = exp(-t sigma (-Delta)^beta) on the
// periodic grid: multiplier construction, periodized heat kernel synthesis and
// the closed forms available for beta = 1/2 (Poisson) and beta = 1 (Gauss).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pfrd/grid.hpp"

namespace pfrd {

struct DiffusionParams {
    double sigma = 1.0;  ///< diffusion coefficient, >= 0
    double beta = 1.0;   ///< fractional order, in (0, 1]

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
        if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
    }
};

/// symbol[s] = exp(-sigma t |xi_s|^{2 beta}) in FFT storage order.
struct SemigroupSymbol {
    GridSpec grid;
    DiffusionParams params;
    double duration = 0.0;
    std::vector<double> symbol;
};

/// Periodized G_{sigma,beta}(t, .) sampled at x_k = k dx, so index 0 is the
/// kernel centre and index n - k is x = -k dx.
struct KernelSample {
    GridSpec grid;
    DiffusionParams params;
    double duration = 0.0;
    std::vector<double> values;

    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return grid.spacing() * s;
    }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }

    /// Signed coordinate of sample k in [-L/2, L/2).
    double centered_x(std::size_t k) const {
        const auto j = grid.frequency_index(k);  // same wrap as the frequency map
        return static_cast<double>(j) * grid.spacing();
    }
};

inline SemigroupSymbol build_symbol(const GridSpec& grid, const DiffusionParams& params, double t) {
    params.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("duration must be >= 0");
    SemigroupSymbol s{grid, params, t, std::vector<double>(grid.n_points(), 1.0)};
    const double rate = params.sigma * t;
    if (rate == 0.0) return s;
    const double two_beta = 2.0 * params.beta;
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
        const double xi = grid.abs_angular_frequency(k);
        const double e = std::exp(-rate * std::pow(xi, two_beta));
        // keep entries strictly positive past exp underflow
        s.symbol[k] = std::max(e, std::numeric_limits<double>::denorm_min());
    }
    s.symbol[0] = 1.0;
    return s;
}

/// S(t)u. The output time is u.time() + t. sigma t = 0 returns u unchanged.
inline Field apply_semigroup(const Field& u, const DiffusionParams& params, double t) {
    params.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("duration must be >= 0");
    if (params.sigma * t == 0.0) return u.with_time(u.time() + t);
    const SemigroupSymbol s = build_symbol(u.grid(), params, t);
    return apply_multiplier(u, s.symbol).with_time(u.time() + t);
}

/// Inverse transform of the symbol. Throws std::domain_error when sigma t = 0
/// (the kernel is a point mass).
inline KernelSample synthesize_kernel(const GridSpec& grid, const DiffusionParams& params, double t) {
    const GridSpec g1 = grid.with_components(1);
    const SemigroupSymbol s = build_symbol(g1, params, t);
    if (params.sigma * t == 0.0) throw std::domain_error("degenerate duration: sigma * t = 0");
    SpectralField spec{g1, 0.0, std::vector<std::complex<double>>(s.symbol.begin(), s.symbol.end())};
    Field f = spectral_inverse(spec);
    return KernelSample{g1, params, t, std::vector<double>(f.values().begin(), f.values().end())};
}

/// G on the real line for beta = 1 (Gaussian) or beta = 1/2 (Cauchy), with
/// u_hat(xi) = exp(-sigma t |xi|^{2 beta}).
inline double closed_form_kernel(double beta, double sigma_t, double x) {
    if (!(sigma_t > 0.0)) throw std::invalid_argument("sigma_t must be positive");
    if (beta == 1.0)
        return std::exp(-x * x / (4.0 * sigma_t)) / (2.0 * std::sqrt(std::numbers::pi * sigma_t));
    if (beta == 0.5) {
        const double r = x / sigma_t;
        return 1.0 / (std::numbers::pi * sigma_t * (1.0 + r * r));
    }
    throw std::invalid_argument("closed form available only for beta = 1/2 or 1");
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

/// Power-law exponent of the kernel tail over x in [lo, hi]. Samples below the
/// smallest normal double are clamped so that underflowed Gaussian tails still
/// yield a (very negative) finite slope.
inline double tail_exponent(const KernelSample& kernel, double lo, double hi) {
    const double half = kernel.grid.length() / 2.0;
    if (!(lo > 0.0) || !(hi < half) || !(lo < hi))
        throw std::invalid_argument("fit window must satisfy 0 < lo < hi < L/2");
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < kernel.grid.n_points() / 2; ++k) {
        const double x = kernel.grid.x(k);
        if (x < lo || x > hi) continue;
        xs.push_back(x);
        ys.push_back(std::max(std::fabs(kernel.values[k]), std::numeric_limits<double>::min()));
    }
    if (xs.size() < 8) throw std::invalid_argument("fit window holds fewer than 8 samples");
    return loglog_slope(xs, ys);
}

}  // namespace pfrd
