#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/error.hpp"
#include "aniso/linalg.hpp"

namespace aniso {

/// Canonical nested ellipsoids B_k = A^k B_0 with B_0 = {x : x^T P x < kappa}
/// and |B_0| = 1. The ellipsoids are open, so a point on the boundary of B_k
/// belongs to the shell B_{k+1} \ B_k.
///
/// P is the geometric series sum_j r^{2j} (A^{-j})^T A^{-j}. It satisfies
/// A^{-T} P A^{-1} = r^{-2} (P - I), hence P - A^{-T} P A^{-1} is positive
/// definite and the family is strictly nested.
class EllipsoidFamily {
public:
    EllipsoidFamily(Dilation d, Mat p, double kappa, double r) : d_(std::move(d)), p_(std::move(p)), kappa_(kappa), r_(r) {
        auto [sq, isq] = spd_sqrt_pair(p_);
        ball_map_ = std::sqrt(kappa_) * isq;
        (void)sq;
    }

    const Dilation& dilation() const { return d_; }
    int dim() const { return d_.dim(); }
    const Mat& shape() const { return p_; }
    double kappa() const { return kappa_; }
    double r() const { return r_; }

    /// Matrix M_k with x in B_k  <=>  x^T M_k x < kappa.
    Mat form_matrix(int k) const {
        Mat ak = d_.power(-k);
        return ak.transpose() * p_ * ak;
    }

    /// (A^{-k} x)^T P (A^{-k} x) / kappa; below 1 exactly on B_k. Strictly
    /// decreasing in k for x != 0. Evaluated through A^{-k} x rather than
    /// M_k, whose entries cancel badly for large |k| when A is not normal.
    double level(int k, const Vec& x) const {
        Vec y = d_.power(-k) * x;
        return y.dot(p_ * y) / kappa_;
    }

    bool contains(int k, const Vec& x) const { return level(k, x) < 1.0; }

    /// |B_k| = b^k.
    double volume(int k) const { return std::pow(d_.det_abs(), k); }

    /// Closed-form |B_0| from det P and kappa.
    double volume_closed_form() const {
        const int n = dim();
        return unit_ball_volume(n) * std::pow(kappa_, 0.5 * n) / std::sqrt(p_.determinant());
    }

    /// Smallest eigenvalue of P - A^{-T} P A^{-1}; nestedness needs >= 0.
    double nestedness_margin() const {
        Mat diff = p_ - form_matrix(1);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (diff + diff.transpose()));
        return es.eigenvalues()(0);
    }

    /// Linear map taking the Euclidean unit ball onto B_0.
    const Mat& ball_map() const { return ball_map_; }

    /// Largest and smallest Euclidean distance from 0 to the boundary of B_k.
    double outer_radius(int k) const {
        Eigen::SelfAdjointEigenSolver<Mat> es(form_matrix(k));
        return std::sqrt(kappa_ / es.eigenvalues()(0));
    }
    double inner_radius(int k) const {
        Eigen::SelfAdjointEigenSolver<Mat> es(form_matrix(k));
        return std::sqrt(kappa_ / es.eigenvalues()(dim() - 1));
    }
    /// Half-width of the bounding box of B_k along coordinate axis i.
    double axis_extent(int k, int i) const { return std::sqrt(kappa_ * form_matrix(k).inverse()(i, i)); }

    /// Boundary parameter of B_k along the ray t e (e a unit vector).
    double boundary_along(int k, const Vec& e) const { return 1.0 / std::sqrt(level(k, e)); }

    /// Deterministic point of B_{k+1} \ B_k. The direction comes from (t1, t2)
    /// and the radial coordinate t in (0, 1) is volume-weighted along the ray.
    Vec shell_point(int k, double t1, double t2, double t) const {
        Vec e = direction_from_unit(dim(), t1, t2);
        double lo = boundary_along(k, e), hi = boundary_along(k + 1, e);
        const int n = dim();
        double rn = std::pow(lo, n) + t * (std::pow(hi, n) - std::pow(lo, n));
        return std::pow(rn, 1.0 / n) * e;
    }

private:
    Dilation d_;
    Mat p_;
    double kappa_;
    double r_;
    Mat ball_map_;
};

/// Builds the canonical family; r defaults to (1 + lambda_minus) / 2.
inline EllipsoidFamily canonical_ellipsoids(const Dilation& d, std::optional<double> r_opt = std::nullopt) {
    const double r = r_opt.value_or(0.5 * (1.0 + d.lambda_minus()));
    if (!(r > 1.0 && r < d.lambda_minus()))
        throw Error(ErrorCode::BadShapeParameter, "shape parameter must lie in (1, lambda_minus)");
    const int n = d.dim();
    const Mat step = r * d.matrix().inverse();
    Mat scaled = Mat::Identity(n, n);
    Mat p = Mat::Identity(n, n);
    for (int j = 1; j <= 200000; ++j) {
        scaled = scaled * step;
        Mat term = scaled.transpose() * scaled;
        p += term;
        if (term.norm() < 1e-14 * p.norm()) break;
        if (j == 200000) throw Error(ErrorCode::BadShapeParameter, "shape series failed to converge");
    }
    p = 0.5 * (p + p.transpose());
    const double kappa = std::pow(std::sqrt(p.determinant()) / unit_ball_volume(n), 2.0 / n);
    return EllipsoidFamily(d, p, kappa, r);
}

/// omega is the smallest k >= 0 with 2 B_0 inside B_k; doubling = b^omega.
struct OmegaResult {
    int omega = 0;
    double doubling = 1.0;
    int omega_exact = 0;
    int omega_scan = 0;
};

inline OmegaResult omega_and_doubling(const EllipsoidFamily& fam, int boundary_samples = 10000) {
    constexpr double slack = 1e-12;
    const int n = fam.dim();
    auto [sq, isq] = spd_sqrt_pair(fam.shape());

    int exact = 0;
    for (;; ++exact) {
        Mat t = sq * fam.dilation().power(-exact) * isq;
        double nrm = op_norm(t);
        if (4.0 * nrm * nrm <= 1.0 + slack) break;
        if (exact > Dilation::kMaxPower) throw Error(ErrorCode::RangeExceeded, "omega not found");
    }

    std::vector<Vec> boundary;
    if (n == 1) {
        boundary = {fam.ball_map() * Vec::Constant(1, 1.0), fam.ball_map() * Vec::Constant(1, -1.0)};
    } else {
        boundary.reserve(boundary_samples);
        for (int i = 0; i < boundary_samples; ++i) {
            double t1 = (i + 0.5) / boundary_samples;
            double t2 = halton(static_cast<std::uint64_t>(i) + 1, 2);
            if (n == 3) {
                // Fibonacci lattice on the sphere.
                t1 = std::fmod(i * 0.6180339887498949, 1.0);
                t2 = (i + 0.5) / boundary_samples;
            }
            boundary.push_back(fam.ball_map() * direction_from_unit(n, t1, t2));
        }
    }
    int scan = 0;
    for (;; ++scan) {
        bool inside = true;
        for (const auto& x : boundary) {
            if (fam.level(scan, 2.0 * x) > 1.0 + slack) {
                inside = false;
                break;
            }
        }
        if (inside) break;
        if (scan > Dilation::kMaxPower) throw Error(ErrorCode::RangeExceeded, "omega scan did not terminate");
    }
    OmegaResult out;
    out.omega_exact = exact;
    out.omega_scan = scan;
    out.omega = std::max(exact, scan);
    out.doubling = std::pow(fam.dilation().det_abs(), out.omega);
    return out;
}

/// Step quasi-norm rho(x) = b^j for x in B_{j+1} \ B_j, rho(0) = 0.
class StepQuasiNorm {
public:
    explicit StepQuasiNorm(EllipsoidFamily fam) : fam_(std::move(fam)) {
        auto o = omega_and_doubling(fam_);
        omega_ = o.omega;
        doubling_ = o.doubling;
    }

    const EllipsoidFamily& family() const { return fam_; }
    const Dilation& dilation() const { return fam_.dilation(); }
    int omega() const { return omega_; }
    double doubling_constant() const { return doubling_; }

    /// The unique j with x in B_{j+1} \ B_j; nullopt at the origin.
    std::optional<int> scale_index(const Vec& x) const {
        if (x.isZero(0.0)) return std::nullopt;
        if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite point");
        const int range = Dilation::kCacheRange;
        int lo = -range, hi = range;
        // Invariant once established: level(lo) >= 1 > level(hi).
        while (fam_.level(hi, x) >= 1.0) {
            lo = hi;
            hi += range;
            if (hi > Dilation::kMaxPower) throw Error(ErrorCode::RangeExceeded, "point too far from origin");
        }
        while (fam_.level(lo, x) < 1.0) {
            hi = lo;
            lo -= range;
            if (lo < -Dilation::kMaxPower) throw Error(ErrorCode::RangeExceeded, "point too close to origin");
        }
        while (hi - lo > 1) {
            int mid = lo + (hi - lo) / 2;
            if (fam_.level(mid, x) < 1.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi - 1;
    }

    double rho(const Vec& x) const {
        auto j = scale_index(x);
        return j ? std::pow(dilation().det_abs(), *j) : 0.0;
    }

private:
    EllipsoidFamily fam_;
    int omega_ = 0;
    double doubling_ = 1.0;
};

/// Smallest c >= 1 for which the two-sided Euclidean comparison
///   rho >= 1:  rho^{zeta-} / c <= |x| <= c rho^{zeta+}
///   rho <  1:  rho^{zeta+} / c <= |x| <= c rho^{zeta-}
/// holds on every sample, and the violations left at that c.
struct EuclidFit {
    double c = 1.0;
    std::size_t violations = 0;
    std::size_t samples = 0;
};

inline EuclidFit euclid_compare(const StepQuasiNorm& q, std::span<const Vec> samples) {
    const double zm = q.dilation().zeta_minus(), zp = q.dilation().zeta_plus();
    auto bounds = [&](const Vec& x) {
        double rho = q.rho(x);
        if (rho == 0.0) throw Error(ErrorCode::InvalidArgument, "samples must exclude the origin");
        double lo_exp = rho >= 1.0 ? zm : zp;
        double hi_exp = rho >= 1.0 ? zp : zm;
        return std::pair{std::pow(rho, lo_exp), std::pow(rho, hi_exp)};
    };
    EuclidFit fit;
    fit.samples = samples.size();
    for (const auto& x : samples) {
        auto [lo, hi] = bounds(x);
        double nx = x.norm();
        fit.c = std::max({fit.c, lo / nx, nx / hi});
    }
    const double c = fit.c * (1.0 + 1e-12);
    for (const auto& x : samples) {
        auto [lo, hi] = bounds(x);
        double nx = x.norm();
        if (nx < lo / c || nx > c * hi) ++fit.violations;
    }
    return fit;
}

/// Uniform sample of B_{k+1} \ B_k (rejection from A^{k+1} B_0).
template <class Rng>
Vec sample_shell_uniform(const EllipsoidFamily& fam, int k, Rng& rng) {
    const int n = fam.dim();
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Mat lift = fam.dilation().power(k + 1) * fam.ball_map();
    for (;;) {
        Vec g(n);
        for (int i = 0; i < n; ++i) g(i) = gauss(rng);
        Vec u = g / g.norm() * std::pow(unif(rng), 1.0 / n);
        Vec x = lift * u;
        if (!fam.contains(k, x) && fam.contains(k + 1, x)) return x;
    }
}

} // namespace aniso
