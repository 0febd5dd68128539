#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "aniso/error.hpp"

namespace aniso {

// Dimensions are capped at 3, so fixed upper bounds keep every small matrix on
// the stack.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Largest singular value.
inline double op_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

inline double min_singular_value(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Symmetric square root and inverse square root of an SPD matrix.
inline std::pair<Mat, Mat> spd_sqrt_pair(const Mat& spd) {
    Eigen::SelfAdjointEigenSolver<Mat> es(spd);
    Vec ev = es.eigenvalues();
    Vec s = ev.array().sqrt();
    Vec is = s.array().inverse();
    Mat v = es.eigenvectors();
    return {v * s.asDiagonal() * v.transpose(), v * is.asDiagonal() * v.transpose()};
}

/// Volume of the Euclidean unit ball in dimension n (n <= 3).
inline double unit_ball_volume(int n) {
    switch (n) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: throw Error(ErrorCode::Unsupported, "dimension above 3");
    }
}

/// Multi-index over at most three coordinates.
struct MultiIndex {
    std::array<int, 3> e{0, 0, 0};
    int n = 1;

    MultiIndex() = default;
    MultiIndex(int dim, std::array<int, 3> entries) : e(entries), n(dim) {}

    int order() const {
        int s = 0;
        for (int i = 0; i < n; ++i) s += e[i];
        return s;
    }
    int operator[](int i) const { return e[i]; }
    auto operator<=>(const MultiIndex&) const = default;
};

inline MultiIndex zero_index(int n) { return MultiIndex(n, {0, 0, 0}); }

inline MultiIndex unit_index(int n, int axis, int power = 1) {
    MultiIndex m = zero_index(n);
    m.e[axis] = power;
    return m;
}

/// All multi-indices with |beta| == order, graded lexicographic (first
/// coordinate descending).
inline std::vector<MultiIndex> indices_of_order(int n, int order) {
    std::vector<MultiIndex> out;
    if (n == 1) {
        out.push_back(MultiIndex(1, {order, 0, 0}));
    } else if (n == 2) {
        for (int a = order; a >= 0; --a) out.push_back(MultiIndex(2, {a, order - a, 0}));
    } else {
        for (int a = order; a >= 0; --a)
            for (int c = order - a; c >= 0; --c) out.push_back(MultiIndex(3, {a, order - a - c, c}));
    }
    return out;
}

inline std::vector<MultiIndex> indices_up_to(int n, int max_order) {
    std::vector<MultiIndex> out;
    for (int k = 0; k <= max_order; ++k) {
        auto level = indices_of_order(n, k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

/// x^alpha.
inline double monomial(const Vec& x, const MultiIndex& a) {
    double v = 1.0;
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.e[i]; ++k) v *= x(i);
    return v;
}

inline cplx monomial(const std::array<cplx, 3>& z, const MultiIndex& a) {
    cplx v = 1.0;
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.e[i]; ++k) v *= z[i];
    return v;
}

/// Expands the derivative of a linearly composed function:
///   d^beta_u [F(M u)] = sum_gamma c_gamma (d^gamma F)(M u),  |gamma| = |beta|.
/// Every d/du_i contributes sum_k M(k, i) d/dxi_k.
inline std::vector<std::pair<MultiIndex, double>> linear_chain_rule(const Mat& m, const MultiIndex& beta) {
    const int n = beta.n;
    std::map<MultiIndex, double> poly{{zero_index(n), 1.0}};
    for (int i = 0; i < n; ++i) {
        for (int rep = 0; rep < beta.e[i]; ++rep) {
            std::map<MultiIndex, double> next;
            for (const auto& [g, c] : poly) {
                for (int k = 0; k < n; ++k) {
                    if (m(k, i) == 0.0) continue;
                    MultiIndex h = g;
                    h.e[k] += 1;
                    next[h] += c * m(k, i);
                }
            }
            poly = std::move(next);
        }
    }
    return {poly.begin(), poly.end()};
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Radical-inverse (Halton) coordinate for a prime base; deterministic and
/// strictly inside (0, 1) for index >= 1.
inline double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

/// Unit direction from low-discrepancy coordinates in [0, 1).
inline Vec direction_from_unit(int n, double t1, double t2) {
    Vec e(n);
    if (n == 1) {
        e(0) = t1 < 0.5 ? -1.0 : 1.0;
    } else if (n == 2) {
        e(0) = std::cos(kTwoPi * t1);
        e(1) = std::sin(kTwoPi * t1);
    } else {
        double z = 2.0 * t2 - 1.0;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        e(0) = r * std::cos(kTwoPi * t1);
        e(1) = r * std::sin(kTwoPi * t1);
        e(2) = z;
    }
    return e;
}

} // namespace aniso
