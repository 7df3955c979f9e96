#pragma once

// Uniform periodic 1-D grids, sampled m-component fields, and the discrete
// Fourier pair used by every solver stage.
//
// Fourier convention (artifact-wide):
//
//     u_hat(xi) = integral u(x) exp(-i xi x) dx,       xi_j = 2 pi j / L
//
// discretized as
//
//     c_j = dx * sum_k u_k exp(-i xi_j x_k),           x_k = k dx
//     u_k = (1/L) * sum_j c_j exp(+i xi_j x_k)
//
// so a sampled kernel of unit mass has c_0 = 1 and the semigroup multiplier
// exp(-sigma t |xi|^{2 beta}) is exactly the transform of the periodized heat
// kernel. Parseval reads dx * sum |u_k|^2 = (1/L) * sum |c_j|^2.
//
// Coefficients are stored in FFT order: storage slot s holds frequency index
// j = s for s < n/2 and j = s - n otherwise, i.e. j in {-n/2, ..., n/2 - 1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "pfrd/error.hpp"

namespace pfrd {

class GridSpec {
public:
    /// Throws std::invalid_argument on odd or small n_points, non-positive
    /// length or zero components.
    static GridSpec make(std::size_t n_points, double length, std::size_t components = 1) {
        if (n_points < 8 || n_points % 2 != 0)
            throw std::invalid_argument("n_points must be even >= 8");
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("length must be positive and finite");
        if (components < 1) throw std::invalid_argument("components must be >= 1");
        return GridSpec(n_points, length, length / static_cast<double>(n_points), components);
    }

    /// Rebuilds a grid from a stored spacing (snapshot files); the spacing is
    /// kept bit-exact and the length re-derived from it.
    static GridSpec from_spacing(std::size_t n_points, double spacing, std::size_t components) {
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("spacing must be positive and finite");
        GridSpec g = make(n_points, spacing * static_cast<double>(n_points), components);
        g.spacing_ = spacing;
        return g;
    }

    std::size_t n_points() const noexcept { return n_points_; }
    double length() const noexcept { return length_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t components() const noexcept { return components_; }
    std::size_t size() const noexcept { return n_points_ * components_; }

    double x(std::size_t k) const noexcept { return static_cast<double>(k) * spacing_; }

    /// Signed frequency index of storage slot s.
    std::int64_t frequency_index(std::size_t s) const noexcept {
        const auto n = static_cast<std::int64_t>(n_points_);
        const auto si = static_cast<std::int64_t>(s);
        return si < n / 2 ? si : si - n;
    }

    /// |xi| for storage slot s, computed from |j| so that it is exactly even in j.
    double abs_angular_frequency(std::size_t s) const noexcept {
        const auto j = frequency_index(s);
        return 2.0 * std::numbers::pi * static_cast<double>(j < 0 ? -j : j) / length_;
    }

    /// Same number of points, components and spacing.
    bool same_as(const GridSpec& other) const noexcept {
        return n_points_ == other.n_points_ && components_ == other.components_ &&
               spacing_ == other.spacing_;
    }

    GridSpec with_components(std::size_t m) const {
        GridSpec g = *this;
        if (m < 1) throw std::invalid_argument("components must be >= 1");
        g.components_ = m;
        return g;
    }

private:
    GridSpec(std::size_t n, double length, double spacing, std::size_t m)
        : n_points_(n), length_(length), spacing_(spacing), components_(m) {}

    std::size_t n_points_;
    double length_;
    double spacing_;
    std::size_t components_;
};

inline GridSpec make_grid(std::size_t n_points, double length, std::size_t components = 1) {
    return GridSpec::make(n_points, length, components);
}

/// Sampled state. Values are point-major: value(k, c) = values[k * m + c].
class Field {
public:
    Field(GridSpec grid, double time, std::vector<double> values)
        : grid_(grid), time_(time), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("field size does not match grid");
        if (!(time_ >= 0.0) || !std::isfinite(time_))
            throw std::invalid_argument("field time must be finite and >= 0");
        for (double v : values_)
            if (!std::isfinite(v)) throw NumericError("non-finite value in field");
    }

    static Field zeros(const GridSpec& grid, double time = 0.0) {
        return Field(grid, time, std::vector<double>(grid.size(), 0.0));
    }

    template <typename Fn>
    static Field sample(const GridSpec& grid, Fn&& fn, double time = 0.0) {
        std::vector<double> v(grid.size());
        for (std::size_t k = 0; k < grid.n_points(); ++k)
            for (std::size_t c = 0; c < grid.components(); ++c)
                v[k * grid.components() + c] = fn(grid.x(k), c);
        return Field(grid, time, std::move(v));
    }

    const GridSpec& grid() const noexcept { return grid_; }
    double time() const noexcept { return time_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> point(std::size_t k) const noexcept {
        return std::span<const double>(values_).subspan(k * grid_.components(), grid_.components());
    }
    double operator()(std::size_t k, std::size_t c = 0) const noexcept {
        return values_[k * grid_.components() + c];
    }

    Field with_time(double t) const { return Field(grid_, t, values_); }

    /// Bitwise equality of grid, time and values.
    bool identical_to(const Field& other) const noexcept {
        return grid_.same_as(other.grid_) && time_ == other.time_ && values_ == other.values_;
    }

private:
    GridSpec grid_;
    double time_;
    std::vector<double> values_;
};

/// Coefficients c_j (see file comment), layout [slot * m + component].
struct SpectralField {
    GridSpec grid;
    double time = 0.0;
    std::vector<std::complex<double>> coefficients;

    std::complex<double> operator()(std::size_t slot, std::size_t c = 0) const {
        return coefficients[slot * grid.components() + c];
    }
};

inline double pointwise_norm(std::span<const double> z) noexcept {
    if (z.size() == 1) return std::fabs(z[0]);
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

/// max_k |u(x_k)|, Euclidean across components.
inline double sup_norm(const Field& u) noexcept {
    double best = 0.0;
    for (std::size_t k = 0; k < u.grid().n_points(); ++k) best = std::max(best, pointwise_norm(u.point(k)));
    return best;
}

/// sup_norm(a - b). Grids must match.
inline double sup_distance(const Field& a, const Field& b) {
    if (!a.grid().same_as(b.grid())) throw std::invalid_argument("grid mismatch");
    const std::size_t m = a.grid().components();
    double best = 0.0;
    std::vector<double> d(m);
    for (std::size_t k = 0; k < a.grid().n_points(); ++k) {
        for (std::size_t c = 0; c < m; ++c) d[c] = a(k, c) - b(k, c);
        best = std::max(best, pointwise_norm(d));
    }
    return best;
}

/// (shift u)(x_j) = u(x_{j+k}), k taken mod n_points.
inline Field circular_shift(const Field& u, std::int64_t k) {
    const auto n = static_cast<std::int64_t>(u.grid().n_points());
    const std::size_t m = u.grid().components();
    const std::int64_t r = ((k % n) + n) % n;
    std::vector<double> out(u.grid().size());
    for (std::int64_t j = 0; j < n; ++j) {
        auto src = u.point(static_cast<std::size_t>((j + r) % n));
        std::copy(src.begin(), src.end(), out.begin() + j * static_cast<std::int64_t>(m));
    }
    return Field(u.grid(), u.time(), std::move(out));
}

namespace detail {

struct FftwDeleter {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

inline FftwBuffer fftw_buffer(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer(p);
}

/// Complex DFT of length n, planned once per (n, sign) with FFTW_ESTIMATE so
/// repeated runs execute the same codelets. Planning is serialized; execution
/// on fftw_malloc'd buffers is thread-safe.
class DftPlan {
public:
    DftPlan(std::size_t n, int sign) : n_(n) {
        auto in = fftw_buffer(n);
        auto out = fftw_buffer(n);
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw std::runtime_error("fftw planning failed");
    }
    DftPlan(const DftPlan&) = delete;
    DftPlan& operator=(const DftPlan&) = delete;
    ~DftPlan() { fftw_destroy_plan(plan_); }

    void execute(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan_, in, out); }
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    fftw_plan plan_;
};

inline const DftPlan& dft_plan(std::size_t n, int sign) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, std::unique_ptr<DftPlan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n, sign}];
    if (!slot) slot = std::make_unique<DftPlan>(n, sign);
    return *slot;
}

}  // namespace detail

inline SpectralField spectral_transform(const Field& u) {
    const GridSpec& g = u.grid();
    const std::size_t n = g.n_points(), m = g.components();
    const auto& plan = detail::dft_plan(n, FFTW_FORWARD);
    auto in = detail::fftw_buffer(n);
    auto out = detail::fftw_buffer(n);
    SpectralField s{g, u.time(), std::vector<std::complex<double>>(g.size())};
    const double dx = g.spacing();
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            in[k][0] = u(k, c);
            in[k][1] = 0.0;
        }
        plan.execute(in.get(), out.get());
        for (std::size_t k = 0; k < n; ++k) s.coefficients[k * m + c] = {dx * out[k][0], dx * out[k][1]};
    }
    return s;
}

/// Real part of the inverse; the imaginary residue of a conjugate-symmetric
/// spectrum is roundoff.
inline Field spectral_inverse(const SpectralField& s) {
    const GridSpec& g = s.grid;
    const std::size_t n = g.n_points(), m = g.components();
    if (s.coefficients.size() != g.size()) throw std::invalid_argument("grid mismatch");
    const auto& plan = detail::dft_plan(n, FFTW_BACKWARD);
    auto in = detail::fftw_buffer(n);
    auto out = detail::fftw_buffer(n);
    std::vector<double> values(g.size());
    const double inv_length = 1.0 / g.length();
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            in[k][0] = s.coefficients[k * m + c].real();
            in[k][1] = s.coefficients[k * m + c].imag();
        }
        plan.execute(in.get(), out.get());
        for (std::size_t k = 0; k < n; ++k) values[k * m + c] = out[k][0] * inv_length;
    }
    return Field(g, s.time, std::move(values));
}

/// Multiplies every component by a real multiplier given in FFT storage order.
inline Field apply_multiplier(const Field& u, std::span<const double> multiplier) {
    const GridSpec& g = u.grid();
    if (multiplier.size() != g.n_points()) throw std::invalid_argument("multiplier size mismatch");
    SpectralField s = spectral_transform(u);
    const std::size_t m = g.components();
    for (std::size_t k = 0; k < g.n_points(); ++k)
        for (std::size_t c = 0; c < m; ++c) s.coefficients[k * m + c] *= multiplier[k];
    return spectral_inverse(s);
}

}  // namespace pfrd
