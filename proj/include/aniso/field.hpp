#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/error.hpp"
#include "aniso/linalg.hpp"
#include "aniso/parallel.hpp"

namespace aniso {

enum class Domain { Spatial, Frequency };

/// Uniform grid on [-X, X)^n with P points per axis and its DFT companion
/// xi_k = (k - P/2) / (2X), which spans [-P/(4X), P/(4X)).
struct Grid {
    int n = 2;
    int points = 256;
    double extent = 8.0;

    Grid() = default;
    Grid(int dim, int p, double x) : n(dim), points(p), extent(x) {
        if (dim < 1 || dim > 3) throw Error(ErrorCode::Unsupported, "grid dimension must be 1, 2 or 3");
        if (p < 2 || (p & (p - 1)) != 0) throw Error(ErrorCode::InvalidArgument, "points per axis must be a power of two");
        if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "extent must be positive");
    }

    double spacing() const { return 2.0 * extent / points; }
    double freq_spacing() const { return 1.0 / (2.0 * extent); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(points);
        return s;
    }
    double cell(Domain d) const { return std::pow(d == Domain::Spatial ? spacing() : freq_spacing(), n); }
    double origin(Domain d) const { return d == Domain::Spatial ? -extent : -0.5 * points * freq_spacing(); }
    double step(Domain d) const { return d == Domain::Spatial ? spacing() : freq_spacing(); }

    /// Row-major: axis 0 varies slowest.
    std::array<int, 3> unflatten(std::size_t idx) const {
        std::array<int, 3> out{0, 0, 0};
        for (int a = n - 1; a >= 0; --a) {
            out[a] = static_cast<int>(idx % points);
            idx /= points;
        }
        return out;
    }
    std::size_t flatten(const std::array<int, 3>& ij) const {
        std::size_t idx = 0;
        for (int a = 0; a < n; ++a) idx = idx * points + ij[a];
        return idx;
    }
    Vec point(Domain d, std::size_t idx) const {
        auto ij = unflatten(idx);
        Vec v(n);
        for (int a = 0; a < n; ++a) v(a) = origin(d) + ij[a] * step(d);
        return v;
    }

    bool operator==(const Grid&) const = default;
};

struct SampledField {
    Grid grid;
    Domain domain = Domain::Spatial;
    std::vector<cplx> values;

    SampledField() = default;
    SampledField(Grid g, Domain d) : grid(g), domain(d), values(g.size(), cplx(0.0)) {}

    static SampledField from_function(const Grid& g, Domain d, const std::function<cplx(const Vec&)>& f) {
        SampledField out(g, d);
        parallel_for(out.values.size(), [&](std::size_t i) { out.values[i] = f(g.point(d, i)); });
        return out;
    }

    Vec point(std::size_t idx) const { return grid.point(domain, idx); }
    double cell() const { return grid.cell(domain); }

    cplx integral() const {
        cplx s = 0.0;
        for (const auto& v : values) s += v;
        return s * cell();
    }
    double lq_norm(double q) const {
        if (std::isinf(q)) {
            double m = 0.0;
            for (const auto& v : values) m = std::max(m, std::abs(v));
            return m;
        }
        long double s = 0.0;
        for (const auto& v : values) s += std::pow(static_cast<long double>(std::abs(v)), q);
        return static_cast<double>(std::pow(s * cell(), 1.0L / q));
    }
    double l2_norm() const { return lq_norm(2.0); }
    double max_abs() const { return lq_norm(std::numeric_limits<double>::infinity()); }

    SampledField& operator*=(cplx c) {
        for (auto& v : values) v *= c;
        return *this;
    }
    SampledField& operator+=(const SampledField& o) {
        check_same(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }
    SampledField& operator-=(const SampledField& o) {
        check_same(o);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
        return *this;
    }
    friend SampledField operator-(SampledField a, const SampledField& b) { return a -= b; }
    friend SampledField operator+(SampledField a, const SampledField& b) { return a += b; }
    friend SampledField operator*(SampledField a, cplx c) { return a *= c; }

private:
    void check_same(const SampledField& o) const {
        if (!(grid == o.grid) || domain != o.domain) throw Error(ErrorCode::TagMismatch, "fields live on different grids");
    }
};

namespace detail {

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* ptr;
};

// Planning is not thread-safe in FFTW; execution with the new-array interface
// is. Plans are created once per shape and kept for the process lifetime.
inline fftw_plan plan_for(int n, int points, int sign) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto key = std::make_tuple(n, points, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    std::size_t total = 1;
    int dims[3];
    for (int a = 0; a < n; ++a) {
        dims[a] = points;
        total *= points;
    }
    FftwBuffer in(total), out(total);
    fftw_plan p = fftw_plan_dft(n, dims, in.ptr, out.ptr, sign, FFTW_ESTIMATE);
    plans.emplace(key, p);
    return p;
}

inline int parity_sign(const Grid& g, std::size_t idx, bool shift_half) {
    auto ij = g.unflatten(idx);
    int s = 0;
    for (int a = 0; a < g.n; ++a) s += ij[a] - (shift_half ? g.points / 2 : 0);
    return (s & 1) ? -1 : 1;
}

inline std::vector<cplx> run_fft(const Grid& g, const std::vector<cplx>& in, int sign) {
    if (g.n > 2) throw Error(ErrorCode::Unsupported, "transforms support dimensions 1 and 2");
    const std::size_t total = g.size();
    FftwBuffer a(total), b(total);
    std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(a.ptr));
    fftw_execute_dft(plan_for(g.n, g.points, sign), a.ptr, b.ptr);
    const cplx* res = reinterpret_cast<const cplx*>(b.ptr);
    return std::vector<cplx>(res, res + total);
}

} // namespace detail

/// Continuous-convention transform: fhat(xi) ~ int f(x) e^{-2 pi i <x, xi>} dx.
inline SampledField dft(const SampledField& f) {
    if (f.domain != Domain::Spatial) throw Error(ErrorCode::TagMismatch, "dft expects a spatial field");
    const Grid& g = f.grid;
    std::vector<cplx> in(f.values.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = f.values[i] * double(detail::parity_sign(g, i, false));
    auto out = detail::run_fft(g, in, FFTW_FORWARD);
    SampledField res(g, Domain::Frequency);
    const double h = g.cell(Domain::Spatial);
    for (std::size_t k = 0; k < out.size(); ++k) res.values[k] = out[k] * (h * detail::parity_sign(g, k, true));
    return res;
}

inline SampledField idft(const SampledField& fh) {
    if (fh.domain != Domain::Frequency) throw Error(ErrorCode::TagMismatch, "idft expects a frequency field");
    const Grid& g = fh.grid;
    std::vector<cplx> in(fh.values.size());
    for (std::size_t k = 0; k < in.size(); ++k) in[k] = fh.values[k] * double(detail::parity_sign(g, k, true));
    auto out = detail::run_fft(g, in, FFTW_BACKWARD);
    SampledField res(g, Domain::Spatial);
    const double dxi = g.cell(Domain::Frequency);
    for (std::size_t i = 0; i < out.size(); ++i) res.values[i] = out[i] * (dxi * detail::parity_sign(g, i, false));
    return res;
}

/// Multilinear interpolation; zero outside the sampled box.
inline cplx interpolate(const SampledField& f, const Vec& x) {
    const Grid& g = f.grid;
    const double o = g.origin(f.domain), h = g.step(f.domain);
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> w{0, 0, 0};
    for (int a = 0; a < g.n; ++a) {
        double u = (x(a) - o) / h;
        if (!(u >= 0.0) || u > g.points - 1) return 0.0;
        int i = std::min(static_cast<int>(std::floor(u)), g.points - 2);
        base[a] = i;
        w[a] = u - i;
    }
    cplx acc = 0.0;
    const int corners = 1 << g.n;
    for (int c = 0; c < corners; ++c) {
        double wt = 1.0;
        std::array<int, 3> ij = base;
        for (int a = 0; a < g.n; ++a) {
            bool up = (c >> a) & 1;
            ij[a] += up;
            wt *= up ? w[a] : 1.0 - w[a];
        }
        if (wt != 0.0) acc += wt * f.values[g.flatten(ij)];
    }
    return acc;
}

enum class Normalization { L1, Linf };

/// g(x) = f(A^k x), times b^k in L1 mode.
inline SampledField dilate_field(const SampledField& f, const Dilation& d, int k, Normalization norm) {
    if (f.grid.n != d.dim()) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
    if (k == 0) return f;
    const Mat ak = d.power(k);
    const Mat aik = d.power(-k);
    const Grid& g = f.grid;
    const double o = g.origin(f.domain), top = o + (g.points - 1) * g.step(f.domain);
    const double thresh = 1e-14 * f.max_abs();
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (std::abs(f.values[i]) <= thresh) continue;
        Vec y = aik * f.point(i);
        for (int a = 0; a < g.n; ++a)
            if (y(a) < o || y(a) > top) throw Error(ErrorCode::ScaleOutOfRange, "dilated support leaves the grid box");
    }
    const double scale = norm == Normalization::L1 ? std::pow(d.det_abs(), k) : 1.0;
    SampledField out(g, f.domain);
    parallel_for(out.values.size(), [&](std::size_t i) { out.values[i] = scale * interpolate(f, ak * f.point(i)); });
    return out;
}

/// idft((2 pi i xi)^beta dft(f)).
inline SampledField spectral_derivative(const SampledField& f, const MultiIndex& beta) {
    if (beta.order() > 6) throw Error(ErrorCode::DerivativeOrderExceeded, "derivative order above 6");
    if (beta.order() == 0) return f;
    SampledField fh = dft(f);
    for (std::size_t k = 0; k < fh.values.size(); ++k) {
        Vec xi = fh.point(k);
        std::array<cplx, 3> z{};
        for (int a = 0; a < fh.grid.n; ++a) z[a] = cplx(0.0, kTwoPi * xi(a));
        fh.values[k] *= monomial(z, beta);
    }
    return idft(fh);
}

/// Relative L2 distance ||a - b|| / ||b||.
inline double relative_l2(const SampledField& a, const SampledField& b) {
    return (a - b).l2_norm() / b.l2_norm();
}

} // namespace aniso
