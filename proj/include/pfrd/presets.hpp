#pragma once

// Deterministic initial conditions.
//
//   constant            params (c) or (c_1, ..., c_m)
//   cosine              params (amplitude, mode[, offset])
//                       u = offset + amplitude cos(2 pi mode x / L)
//   gaussian_bump       params (amplitude, width[, centre = L/2])
//                       u = amplitude exp(-(x - centre)^2 / (2 width^2))
//   raised_cosine_bump  params (amplitude, half_width[, centre = L/2])
//                       u = amplitude (1 + cos(pi (x - centre) / half_width)) / 2 inside, 0 outside
//   peregrine_sum       params (cos_amplitude, bump_amplitude, bump_width), needs a lattice
//                       v = cos_amplitude cos(2 pi x / P) on the cell,
//                       w = gaussian_bump(bump_amplitude, bump_width) on the box, u = lift(v) + w
//   random_bounded      params (sup), seed
//                       point-major samples sup * (2 U - 1), U = (splitmix64() >> 11) * 2^-53
//
// Vector-valued reactions receive the same profile on every component (except
// constant with m params).
//
// splitmix64 (state s, 64-bit wrapping arithmetic):
//   s += 0x9E3779B97F4A7C15
//   z = s; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// seeded with s = seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "pfrd/config.hpp"
#include "pfrd/grid.hpp"
#include "pfrd/peregrine.hpp"

namespace pfrd {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// sup * (2U - 1) at every (point, component), point-major.
inline Field random_bounded_field(const GridSpec& grid, double sup, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> v(grid.size());
    for (double& x : v) x = sup * (2.0 * rng.uniform() - 1.0);
    return Field(grid, 0.0, std::move(v));
}

inline Field gaussian_bump(const GridSpec& grid, double amplitude, double width, double centre) {
    return Field::sample(grid, [&](double x, std::size_t) {
        const double r = (x - centre) / width;
        return amplitude * std::exp(-0.5 * r * r);
    });
}

inline Field raised_cosine_bump(const GridSpec& grid, double amplitude, double half_width, double centre) {
    return Field::sample(grid, [&](double x, std::size_t) {
        const double r = (x - centre) / half_width;
        return std::fabs(r) < 1.0 ? 0.5 * amplitude * (1.0 + std::cos(std::numbers::pi * r)) : 0.0;
    });
}

struct InitialData {
    Field u;
    std::optional<PeregrineState> decomposition;  ///< set for peregrine_sum
};

inline InitialData build_initial(const RunConfig& cfg) {
    const GridSpec grid = cfg.grid();
    const auto& p = cfg.initial.params;
    const double L = grid.length();
    auto opt = [&](std::size_t i, double fallback) { return p.size() > i ? p[i] : fallback; };

    switch (cfg.initial.kind) {
        case InitialKind::constant:
            return {Field::sample(grid, [&](double, std::size_t c) { return p.size() == 1 ? p[0] : p[c]; }), {}};
        case InitialKind::cosine: {
            const double amp = p[0], mode = p[1], offset = opt(2, 0.0);
            return {Field::sample(grid, [&](double x, std::size_t) {
                        return offset + amp * std::cos(2.0 * std::numbers::pi * mode * x / L);
                    }),
                    {}};
        }
        case InitialKind::gaussian_bump: return {gaussian_bump(grid, p[0], p[1], opt(2, 0.5 * L)), {}};
        case InitialKind::raised_cosine_bump: return {raised_cosine_bump(grid, p[0], p[1], opt(2, 0.5 * L)), {}};
        case InitialKind::peregrine_sum: {
            const LatticeSpec lat = cfg.lattice();
            const std::size_t m = grid.components();
            const double P = lat.period;
            Field v = Field::sample(lat.cell_grid(m), [&](double x, std::size_t) {
                return p[0] * std::cos(2.0 * std::numbers::pi * x / P);
            });
            Field w = gaussian_bump(lat.box_grid(m), p[1], p[2], 0.5 * lat.box_length());
            PeregrineState s = make_peregrine_state(std::move(v), std::move(w), lat);
            Field u = recombine(s, lat);
            return {std::move(u), std::move(s)};
        }
        case InitialKind::random_bounded: return {random_bounded_field(grid, p[0], *cfg.initial.seed), {}};
    }
    throw ConfigError("unsupported initial kind", "initial.kind");
}

}  // namespace pfrd
