#pragma once

#include <cmath>
#include <optional>

#include "aniso/field.hpp"
#include "aniso/quasinorm.hpp"

namespace aniso {

/// h(t) = e^{-1/t} for t > 0, else 0.
inline double smooth_h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// Smooth step: 1 for t <= 0, 0 for t >= 1, all derivatives vanish at both
/// seams.
inline double smooth_step(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = smooth_h(1.0 - t), b = smooth_h(t);
    return a / (a + b);
}

/// Littlewood-Paley partition adapted to the adjoint ellipsoids B_k^*.
///
/// eta(xi) = smooth_step(s(xi)) where the scale coordinate
///   s = ln Q_{-1} / (ln Q_{-1} - ln Q_0),  Q_k = level_k^*(xi),
/// is 0 on the boundary of B_{-1}^* and 1 on the boundary of B_0^*. Then
/// eta = 1 on B_{-1}^*, eta = 0 off B_0^*, and
///   psi_hat_j(xi) = eta((A^*)^{-j-1} xi) - eta((A^*)^{-j} xi)
/// is supported in B_{j+1}^* \ B_{j-1}^* and telescopes to 1 off the origin.
class LPPartition {
public:
    explicit LPPartition(EllipsoidFamily fam_star) : fam_(std::move(fam_star)), qn_(fam_) {}

    const EllipsoidFamily& family_star() const { return fam_; }
    const StepQuasiNorm& quasinorm_star() const { return qn_; }
    int dim() const { return fam_.dim(); }

    /// eta((A^*)^{-k} xi).
    double eta_at(int k, const Vec& xi) const {
        if (xi.isZero(0.0)) return 1.0;
        const double q_in = fam_.level(k - 1, xi);
        if (q_in <= 1.0) return 1.0;
        const double q_out = fam_.level(k, xi);
        if (q_out >= 1.0) return 0.0;
        const double lin = std::log(q_in);
        return smooth_step(lin / (lin - std::log(q_out)));
    }

    double eta(const Vec& xi) const { return eta_at(0, xi); }

    double psi_hat(const Vec& xi) const { return eta_at(1, xi) - eta_at(0, xi); }

    /// psi_hat((A^*)^{-j} xi).
    double psi_hat_j(int j, const Vec& xi) const { return eta_at(j + 1, xi) - eta_at(j, xi); }

    /// Shell index of xi for the adjoint family (xi in B_{j+1}^* \ B_j^*).
    std::optional<int> shell_of(const Vec& xi) const { return qn_.scale_index(xi); }

    /// Smooth logarithmic scale coordinate sum_j j psi_hat_j(xi). It equals
    /// j0 + 1 - eta((A^*)^{-j0-1} xi) on the shell j0 and increases by exactly
    /// one under xi -> A^* xi.
    double log_scale(const Vec& xi) const {
        auto j0 = shell_of(xi);
        if (!j0) throw Error(ErrorCode::InvalidArgument, "log scale undefined at the origin");
        return *j0 + 1.0 - eta_at(*j0 + 1, xi);
    }

    /// Sum of psi_hat_j over |j| <= J in ascending j.
    double partial_sum(int J, const Vec& xi) const {
        double s = 0.0;
        for (int j = -J; j <= J; ++j) s += psi_hat_j(j, xi);
        return s;
    }

private:
    EllipsoidFamily fam_;
    StepQuasiNorm qn_;
};

inline LPPartition build_partition(const EllipsoidFamily& fam_star) { return LPPartition(fam_star); }

/// Partition for a dilation: built on the adjoint family with the same margins.
inline LPPartition build_partition(const Dilation& d) { return LPPartition(canonical_ellipsoids(d.adjoint())); }

} // namespace aniso
