#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aniso/error.hpp"
#include "aniso/linalg.hpp"

namespace aniso {

/// Eccentricity margins: 1 < lower < |lambda_1| and |lambda_n| < upper.
struct Margins {
    double lower = 0.0;
    double upper = 0.0;
};

/// An expansive matrix A with its spectral data and cached powers.
///
/// Immutable after construction. Powers A^k and (A^T)^k for |k| <= 64 are
/// built eagerly, so concurrent reads need no locking.
class Dilation {
public:
    static constexpr int kCacheRange = 64;
    static constexpr int kMaxPower = 4096;

    explicit Dilation(const Mat& a, std::optional<Margins> margins = std::nullopt) : a_(a) {
        if (a.rows() != a.cols()) throw Error(ErrorCode::InvalidArgument, "dilation matrix must be square");
        n_ = static_cast<int>(a.rows());
        if (n_ < 1 || n_ > 3) throw Error(ErrorCode::Unsupported, "dimension must be 1, 2 or 3");
        if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite matrix entry");

        Eigen::EigenSolver<Mat> es(a, false);
        eig_moduli_.resize(n_);
        for (int i = 0; i < n_; ++i) eig_moduli_[i] = std::abs(es.eigenvalues()(i));
        std::sort(eig_moduli_.begin(), eig_moduli_.end());
        if (eig_moduli_.front() <= 1.0)
            throw Error(ErrorCode::NotExpansive,
                        "eigenvalue modulus " + std::to_string(eig_moduli_.front()) + " is not above 1");

        b_ = std::abs(a.determinant());
        if (!(b_ > 1.0)) throw Error(ErrorCode::NotExpansive, "|det A| must exceed 1");

        Margins m = margins.value_or(Margins{0.5 * (1.0 + eig_moduli_.front()), 1.05 * eig_moduli_.back()});
        if (!(1.0 < m.lower && m.lower < eig_moduli_.front()))
            throw Error(ErrorCode::BadMargins, "need 1 < lambda_minus < smallest eigenvalue modulus");
        if (!(eig_moduli_.back() < m.upper))
            throw Error(ErrorCode::BadMargins, "need largest eigenvalue modulus < lambda_plus");
        margins_ = m;

        build_cache();
    }

    int dim() const { return n_; }
    const Mat& matrix() const { return a_; }
    /// b = |det A|.
    double det_abs() const { return b_; }
    const std::vector<double>& eig_moduli() const { return eig_moduli_; }
    double lambda_minus() const { return margins_.lower; }
    double lambda_plus() const { return margins_.upper; }
    Margins margins() const { return margins_; }
    double zeta_minus() const { return std::log(margins_.lower) / std::log(b_); }
    double zeta_plus() const { return std::log(margins_.upper) / std::log(b_); }

    /// A^k. Cached for |k| <= 64, assembled on demand up to kMaxPower.
    Mat power(int k) const { return power_from(powers_, k); }

    /// (A^*)^k = (A^T)^k.
    Mat adjoint_power(int k) const { return power_from(adjoint_powers_, k); }

    Dilation adjoint() const { return Dilation(a_.transpose(), margins_); }

    Dilation with_margins(Margins m) const { return Dilation(a_, m); }

private:
    void build_cache() {
        const int size = 2 * kCacheRange + 1;
        powers_.assign(size, Mat::Identity(n_, n_));
        Mat inv = a_.inverse();
        for (int k = 1; k <= kCacheRange; ++k) {
            powers_[kCacheRange + k] = powers_[kCacheRange + k - 1] * a_;
            powers_[kCacheRange - k] = powers_[kCacheRange - k + 1] * inv;
        }
        adjoint_powers_.resize(size);
        for (int i = 0; i < size; ++i) adjoint_powers_[i] = powers_[i].transpose();
    }

    Mat power_from(const std::vector<Mat>& cache, int k) const {
        if (std::abs(k) <= kCacheRange) return cache[kCacheRange + k];
        if (std::abs(k) > kMaxPower)
            throw Error(ErrorCode::RangeExceeded, "power " + std::to_string(k) + " beyond supported range");
        const int step = k > 0 ? kCacheRange : -kCacheRange;
        Mat out = Mat::Identity(n_, n_);
        int left = k;
        while (std::abs(left) > kCacheRange) {
            out = out * cache[kCacheRange + step];
            left -= step;
        }
        return out * cache[kCacheRange + left];
    }

    Mat a_;
    int n_ = 0;
    double b_ = 0.0;
    std::vector<double> eig_moduli_;
    Margins margins_;
    std::vector<Mat> powers_;
    std::vector<Mat> adjoint_powers_;
};

/// Moves both margins halfway toward the spectrum.
inline Dilation tighten(const Dilation& d) {
    const auto& mod = d.eig_moduli();
    return d.with_margins({0.5 * (d.lambda_minus() + mod.front()), 0.5 * (mod.back() + d.lambda_plus())});
}

/// Smallest M >= 1 with ||(A^*)^j||^{1/j} <= (1 + eps) lambda_plus for every j
/// in (M, M + window]. Products are renormalised each step so large j never
/// overflow.
inline int spectral_threshold(const Dilation& d, double eps, int window = 64, int max_probe = 1'000'000) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const double log_bound = std::log((1.0 + eps) * d.lambda_plus());
    const Mat at = d.matrix().transpose();
    Mat prod = Mat::Identity(d.dim(), d.dim());
    double log_scale = 0.0;
    int start = 1;
    for (int j = 1; j <= max_probe; ++j) {
        prod = prod * at;
        double nrm = op_norm(prod);
        double g = (std::log(nrm) + log_scale) / j;
        prod /= nrm;
        log_scale += std::log(nrm);
        if (j > start && g > log_bound) start = j;
        if (j == start + window) return start;
    }
    throw Error(ErrorCode::RangeExceeded, "spectral threshold not reached within probe budget");
}

} // namespace aniso
