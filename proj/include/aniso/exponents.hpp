#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "aniso/dilation.hpp"
#include "aniso/error.hpp"

namespace aniso {

/// q = infinity is IEEE infinity, so 1/q evaluates to 0.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double reciprocal(double q) { return std::isinf(q) ? 0.0 : 1.0 / q; }

struct AdmissibleTriple {
    double p = 1.0;
    double q = 2.0;
    int s = 0;
};

struct AdmissibleQuadruple {
    AdmissibleTriple triple;
    double d = 0.0;
    double theta = 0.0;
};

/// An open or closed interval endpoint pair.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = true;
    bool upper_open = false;
};

inline void check_p(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::BadP, "p must lie in (0, 1]");
}

/// Smallest admissible moment order floor((1/p - 1) ln b / ln lambda_minus).
inline int min_s(const Dilation& d, double p) {
    check_p(p);
    double v = (1.0 / p - 1.0) * std::log(d.det_abs()) / std::log(d.lambda_minus());
    return static_cast<int>(std::floor(v));
}

/// Open lower bound s ln lambda_plus / ln b + 1 - 1/q on the molecule decay d.
inline double min_d(const Dilation& d, int s, double q) {
    if (s < 0) throw Error(ErrorCode::InvalidArgument, "s must be nonnegative");
    if (!(q >= 1.0)) throw Error(ErrorCode::InvalidArgument, "q must lie in [1, inf]");
    return s * d.zeta_plus() + 1.0 - reciprocal(q);
}

inline AdmissibleTriple make_triple(const Dilation& d, double p, double q, int s) {
    check_p(p);
    if (!(q >= 1.0) || !(p < q)) throw Error(ErrorCode::InvalidArgument, "need 1 <= q and p < q");
    if (s < min_s(d, p)) throw Error(ErrorCode::InvalidArgument, "s below the admissible minimum");
    return {p, q, s};
}

/// d defaults to min_d + 0.5.
inline AdmissibleQuadruple make_quadruple(const Dilation& dil, AdmissibleTriple t, std::optional<double> d = std::nullopt) {
    const double bound = min_d(dil, t.s, t.q);
    const double dv = d.value_or(bound + 0.5);
    if (!(dv > bound)) throw Error(ErrorCode::InvalidArgument, "d must exceed its lower bound");
    const double theta = (1.0 / t.p - reciprocal(t.q)) / dv;
    if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0, 1)");
    return {t, dv, theta};
}

/// Lower bound on the kernel regularity R needed for (p, s).
inline double czr_lower(const Dilation& d, double p, int s) {
    check_p(p);
    const double ll = std::log(d.lambda_minus());
    return std::max((1.0 / p - 1.0) * std::log(d.det_abs()) / ll, s * std::log(d.lambda_plus()) / ll);
}

/// (N ln lambda_minus / ln b - 1) ln b / ln lambda_plus.
inline double dw_bound(const Dilation& d, int n_order) {
    const double lb = std::log(d.det_abs());
    return (n_order * std::log(d.lambda_minus()) / lb - 1.0) * lb / std::log(d.lambda_plus());
}

struct RRange {
    double bound = 0.0;
    bool empty = true;
    /// Largest integer strictly below bound; meaningful only when !empty.
    /// A bound within 1e-12 of an integer counts as that integer.
    int r_max = -1;
};

inline RRange dw_R_range(const Dilation& d, int n_order) {
    if (n_order < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
    RRange out;
    out.bound = dw_bound(d, n_order);
    if (out.bound <= 0.0) return out;
    out.empty = false;
    out.r_max = static_cast<int>(std::ceil(out.bound - 1e-12)) - 1;
    return out;
}

/// (ln lambda_minus)^2 / (ln b ln lambda_plus).
inline double range_coefficient(const Dilation& d) {
    const double ll = std::log(d.lambda_minus());
    return ll * ll / (std::log(d.det_abs()) * std::log(d.lambda_plus()));
}

struct MultiplierBudget {
    int N = 0;
    double L = 0.0;
    int floorL = 0;
    /// Open lower endpoint; the range is p_low < p <= 1.
    double p_low = 1.0;
    bool tightened = false;
    double L_tightened = 0.0;
    Margins margins_used;
};

/// p-range for a multiplier of Mihlin order N. When L is an integer the
/// margins are tightened once; floor(L) is unchanged and p_low is reported
/// from the original margins.
inline MultiplierBudget multiplier_p_range(const Dilation& d, int n_order) {
    if (n_order < 1) throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
    MultiplierBudget out;
    out.N = n_order;
    out.L = dw_bound(d, n_order);
    out.margins_used = d.margins();
    out.L_tightened = out.L;
    const double nearest = std::round(out.L);
    if (std::abs(out.L - nearest) <= 1e-12) {
        Dilation t = tighten(d);
        out.tightened = true;
        out.L_tightened = dw_bound(t, n_order);
        out.margins_used = t.margins();
        out.floorL = static_cast<int>(nearest);
        if (static_cast<int>(std::floor(out.L_tightened)) != out.floorL)
            throw Error(ErrorCode::InvalidArgument, "tightening changed floor(L)");
    } else {
        out.floorL = static_cast<int>(std::floor(out.L));
    }
    if (out.floorL <= 0) throw Error(ErrorCode::EmptyRange, "floor(L) is not positive");
    out.p_low = 1.0 / (1.0 + out.floorL * range_coefficient(d));
    return out;
}

/// Open interval (p_low, 1) from the molecular bound for kernels of order R.
inline Interval sio_p_range(const Dilation& d, int R) {
    if (R < 1) throw Error(ErrorCode::InvalidArgument, "R must be at least 1");
    return {1.0 / (1.0 + R * range_coefficient(d)), 1.0, true, true};
}

} // namespace aniso
