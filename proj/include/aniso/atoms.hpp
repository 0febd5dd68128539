#pragma once

#include <Eigen/QR>

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "aniso/exponents.hpp"
#include "aniso/field.hpp"
#include "aniso/quasinorm.hpp"

namespace aniso {

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
    std::vector<double> x(order), w(order);
    for (int i = 0; i < order; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1.0;
            dp = order * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Quadrature nodes on B_0 (weights sum to |B_0| = 1): polar Gauss-Legendre
/// on the unit disk, or Gauss-Legendre on an interval, pushed through the
/// linear map onto B_0.
inline std::vector<std::pair<Vec, double>> ball_quadrature(const EllipsoidFamily& fam, int order) {
    const int n = fam.dim();
    if (n > 2) throw Error(ErrorCode::Unsupported, "polynomial quadrature supports dimensions 1 and 2");
    const Mat& L = fam.ball_map();
    const double jac = std::abs(L.determinant());
    auto [gx, gw] = gauss_legendre(order);
    std::vector<std::pair<Vec, double>> out;
    if (n == 1) {
        for (int i = 0; i < order; ++i) out.push_back({L * Vec::Constant(1, gx[i]), gw[i] * jac});
        return out;
    }
    const int angles = 2 * order + 2;
    for (int i = 0; i < order; ++i) {
        const double r = 0.5 * (gx[i] + 1.0), wr = 0.5 * gw[i] * r;
        for (int a = 0; a < angles; ++a) {
            const double t = kTwoPi * a / angles;
            Vec z(2);
            z << r * std::cos(t), r * std::sin(t);
            out.push_back({L * z, wr * kTwoPi / angles * jac});
        }
    }
    return out;
}

/// Polynomials of degree <= s, orthonormal in L^2(B_0):
/// Q_a(x) = sum_b coeff(a, b) x^b over graded-lex monomials.
struct PolynomialBasis {
    int n = 2;
    int s = 0;
    std::vector<MultiIndex> alphas;
    Eigen::MatrixXd coeff;
    double gram_residual = 0.0;

    std::size_t size() const { return alphas.size(); }
    double eval(std::size_t a, const Vec& x) const {
        double v = 0.0;
        for (std::size_t b = 0; b < alphas.size(); ++b)
            if (coeff(a, b) != 0.0) v += coeff(a, b) * monomial(x, alphas[b]);
        return v;
    }
};

namespace detail {

inline Eigen::MatrixXd gram_of(const std::vector<std::pair<Vec, double>>& quad, const std::vector<MultiIndex>& alphas,
                               const Eigen::MatrixXd& coeff) {
    const auto D = static_cast<Eigen::Index>(alphas.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(D, D);
    Eigen::VectorXd mono(D), vals(D);
    for (const auto& [x, w] : quad) {
        for (Eigen::Index b = 0; b < D; ++b) mono(b) = monomial(x, alphas[b]);
        vals = coeff * mono;
        g.noalias() += w * vals * vals.transpose();
    }
    return g;
}

} // namespace detail

inline PolynomialBasis orthonormal_basis(const EllipsoidFamily& fam, int s, int quadrature_order = 0) {
    if (s < 0 || s > 4) throw Error(ErrorCode::InvalidArgument, "degree bound must lie in [0, 4]");
    const int order = quadrature_order > 0 ? quadrature_order : s + 4;
    const auto quad = ball_quadrature(fam, order);
    PolynomialBasis pb;
    pb.n = fam.dim();
    pb.s = s;
    pb.alphas = indices_up_to(pb.n, s);
    const auto D = static_cast<Eigen::Index>(pb.alphas.size());
    pb.coeff = Eigen::MatrixXd::Identity(D, D);
    // Two Cholesky passes: the second removes what the first left behind.
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::MatrixXd g = detail::gram_of(quad, pb.alphas, pb.coeff);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        if (pass == 0 && es.eigenvalues()(D - 1) > 1e12 * es.eigenvalues()(0))
            throw Error(ErrorCode::IllConditioned, "monomial Gram matrix condition above 1e12");
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(D, D));
        pb.coeff = Linv * pb.coeff;
    }
    Eigen::MatrixXd g = detail::gram_of(quad, pb.alphas, pb.coeff);
    pb.gram_residual = (g - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff();
    return pb;
}

/// C_0 = |B_0| sup_x sum_a |Q_a(x)| sup_u |Q_a(u)| over a dense polar sample.
inline double estimate_C0(const PolynomialBasis& pb, const EllipsoidFamily& fam, int radial = 200, int angular = 400) {
    std::vector<Vec> pts;
    const Mat& L = fam.ball_map();
    if (pb.n == 1) {
        for (int i = 0; i <= radial; ++i) pts.push_back(L * Vec::Constant(1, -1.0 + 2.0 * i / radial));
    } else {
        for (int i = 0; i <= radial; ++i)
            for (int a = 0; a < (i == 0 ? 1 : angular); ++a) {
                const double r = static_cast<double>(i) / radial, t = kTwoPi * a / angular;
                Vec z(2);
                z << r * std::cos(t), r * std::sin(t);
                pts.push_back(L * z);
            }
    }
    std::vector<double> sup(pb.size(), 0.0);
    std::vector<std::vector<double>> vals(pts.size(), std::vector<double>(pb.size()));
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t a = 0; a < pb.size(); ++a) {
            vals[p][a] = pb.eval(a, pts[p]);
            sup[a] = std::max(sup[a], std::abs(vals[p][a]));
        }
    double c0 = 0.0;
    for (const auto& row : vals) {
        double acc = 0.0;
        for (std::size_t a = 0; a < pb.size(); ++a) acc += std::abs(row[a]) * sup[a];
        c0 = std::max(c0, acc);
    }
    return c0;
}

/// pi_B on a grid for B = center + B_j, orthonormal in the grid-indicator
/// measure h^n sum_{x in B}. In that measure the projection is exact:
/// it fixes P_s and the complement has vanishing discrete moments.
class DiscreteProjector {
public:
    DiscreteProjector(const Grid& g, const EllipsoidFamily& fam, int j, Vec center, int s)
        : grid_(g), j_(j), center_(std::move(center)), s_(s) {
        if (g.n != fam.dim()) throw Error(ErrorCode::InvalidArgument, "grid dimension mismatch");
        alphas_ = indices_up_to(g.n, s);
        cell_ = g.cell(Domain::Spatial);
        const Mat to_unit = fam.dilation().power(-j);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (fam.contains(j, g.point(Domain::Spatial, i) - center_)) pts_.push_back(i);
        const auto D = static_cast<Eigen::Index>(alphas_.size());
        const auto npts = static_cast<Eigen::Index>(pts_.size());
        if (npts < 2 * D) throw Error(ErrorCode::IllConditioned, "too few grid points inside the ellipsoid");
        Eigen::MatrixXd V(npts, D);
        for (Eigen::Index r = 0; r < npts; ++r) {
            Vec u = to_unit * (g.point(Domain::Spatial, pts_[r]) - center_);
            for (Eigen::Index c = 0; c < D; ++c) V(r, c) = monomial(u, alphas_[c]);
        }
        // Column scaling leaves the span alone and keeps the conditioning test
        // meaningful when B_j is much larger than the grid box.
        for (Eigen::Index c = 0; c < D; ++c) V.col(c) /= V.col(c).cwiseAbs().maxCoeff();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
        Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
        if (diag.minCoeff() < 1e-6 * diag.maxCoeff())
            throw Error(ErrorCode::IllConditioned, "discrete monomial Gram matrix condition above 1e12");
        Q_ = qr.householderQ() * Eigen::MatrixXd::Identity(npts, D);
        Q_ /= std::sqrt(cell_);
        // Reorthonormalise once in the discrete measure.
        Eigen::MatrixXd G = cell_ * (Q_.transpose() * Q_);
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        Q_ = llt.matrixL().solve(Q_.transpose()).transpose();
    }

    /// Grid points of center + B_j; below twice the dimension of P_s the
    /// projector refuses to build.
    static std::size_t count_inside(const Grid& g, const EllipsoidFamily& fam, int j, const Vec& center) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (fam.contains(j, g.point(Domain::Spatial, i) - center)) ++n;
        return n;
    }

    const Grid& grid() const { return grid_; }
    int scale() const { return j_; }
    const Vec& center() const { return center_; }
    int degree() const { return s_; }
    const std::vector<std::size_t>& points() const { return pts_; }
    /// Discrete measure of B.
    double measure() const { return cell_ * static_cast<double>(pts_.size()); }

    std::vector<cplx> coefficients(const SampledField& f) const {
        check(f);
        std::vector<cplx> c(alphas_.size());
        for (std::size_t a = 0; a < alphas_.size(); ++a) {
            long double re = 0.0L, im = 0.0L;
            for (std::size_t r = 0; r < pts_.size(); ++r) {
                const cplx v = f.values[pts_[r]];
                re += static_cast<long double>(v.real()) * Q_(r, a);
                im += static_cast<long double>(v.imag()) * Q_(r, a);
            }
            c[a] = cplx(static_cast<double>(re), static_cast<double>(im)) * cell_;
        }
        return c;
    }

    /// pi_B f on B, zero elsewhere.
    SampledField project(const SampledField& f) const {
        const auto c = coefficients(f);
        SampledField out(grid_, Domain::Spatial);
        for (std::size_t r = 0; r < pts_.size(); ++r) {
            cplx v = 0.0;
            for (std::size_t a = 0; a < c.size(); ++a) v += c[a] * Q_(r, a);
            out.values[pts_[r]] = v;
        }
        return out;
    }

    /// (f - pi_B f) 1_B.
    SampledField complement(const SampledField& f) const {
        SampledField p = project(f);
        SampledField out(grid_, Domain::Spatial);
        for (auto i : pts_) out.values[i] = f.values[i] - p.values[i];
        return out;
    }

    /// Restriction f 1_B.
    SampledField restrict(const SampledField& f) const {
        check(f);
        SampledField out(grid_, Domain::Spatial);
        for (auto i : pts_) out.values[i] = f.values[i];
        return out;
    }

    /// C_0 of this projector: |B| sup_x sum_a |Q_a(x)| max |Q_a|.
    double C0() const {
        std::vector<double> sup(alphas_.size(), 0.0);
        for (std::size_t a = 0; a < alphas_.size(); ++a) sup[a] = Q_.col(static_cast<Eigen::Index>(a)).cwiseAbs().maxCoeff();
        double best = 0.0;
        for (Eigen::Index r = 0; r < Q_.rows(); ++r) {
            double acc = 0.0;
            for (std::size_t a = 0; a < alphas_.size(); ++a) acc += std::abs(Q_(r, static_cast<Eigen::Index>(a))) * sup[a];
            best = std::max(best, acc);
        }
        return measure() * best;
    }

private:
    void check(const SampledField& f) const {
        if (f.domain != Domain::Spatial || !(f.grid == grid_))
            throw Error(ErrorCode::TagMismatch, "field does not live on the projector grid");
    }

    Grid grid_;
    int j_;
    Vec center_;
    int s_;
    double cell_ = 0.0;
    std::vector<MultiIndex> alphas_;
    std::vector<std::size_t> pts_;
    Eigen::MatrixXd Q_;
};

/// Discrete moments sum h^n f(x) (x - center)^alpha for |alpha| <= s.
inline std::vector<cplx> discrete_moments(const SampledField& f, const Vec& center, int s) {
    const auto alphas = indices_up_to(f.grid.n, s);
    std::vector<std::complex<long double>> acc(alphas.size(), 0.0L);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (f.values[i] == 0.0) continue;
        const Vec x = f.point(i) - center;
        const std::complex<long double> v(f.values[i].real(), f.values[i].imag());
        for (std::size_t a = 0; a < alphas.size(); ++a) acc[a] += v * static_cast<long double>(monomial(x, alphas[a]));
    }
    std::vector<cplx> out;
    for (const auto& v : acc) out.emplace_back(static_cast<double>(v.real() * f.cell()), static_cast<double>(v.imag() * f.cell()));
    return out;
}

/// rho(x - center) on every grid point. Cached per grid and center because
/// it is reused across many norms.
class RhoTable {
public:
    explicit RhoTable(const StepQuasiNorm& q) : q_(q) {}

    std::shared_ptr<const std::vector<double>> get(const Grid& g, const Vec& center, Domain dom = Domain::Spatial) const {
        std::vector<double> key{double(g.n), double(g.points), g.extent, dom == Domain::Spatial ? 0.0 : 1.0};
        for (int i = 0; i < center.size(); ++i) key.push_back(center(i));
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        auto table = std::make_shared<std::vector<double>>(g.size());
        parallel_for(g.size(), [&](std::size_t i) { (*table)[i] = q_.rho(g.point(dom, i) - center); });
        std::lock_guard lock(mu_);
        cache_.emplace(key, table);
        return table;
    }

    const StepQuasiNorm& quasinorm() const { return q_; }

private:
    const StepQuasiNorm& q_;
    mutable std::mutex mu_;
    mutable std::map<std::vector<double>, std::shared_ptr<const std::vector<double>>> cache_;
};

struct MolecularNorm {
    double value = 0.0;
    double lq = 0.0;
    double weighted = 0.0;
    /// Share of the weighted q-th power mass in the outer 5% band of the box.
    double tail_fraction = 0.0;
};

/// N(M) = ||M||_q^{1 - theta} ||rho(x - x0)^d M||_q^theta by grid quadrature.
inline MolecularNorm molecular_norm(const SampledField& M, const Vec& center, const AdmissibleQuadruple& quad, const RhoTable& rho) {
    const double q = quad.triple.q;
    const auto table = rho.get(M.grid, center);
    const double band = 0.95 * M.grid.extent;
    long double plain = 0.0L, weighted = 0.0L, tail = 0.0L, wmax = 0.0L, pmax = 0.0L;
    for (std::size_t i = 0; i < M.values.size(); ++i) {
        const double a = std::abs(M.values[i]);
        if (a == 0.0) continue;
        const double w = std::pow((*table)[i], quad.d) * a;
        if (std::isinf(q)) {
            pmax = std::max<long double>(pmax, a);
            wmax = std::max<long double>(wmax, w);
            continue;
        }
        const long double wq = std::pow(static_cast<long double>(w), q);
        plain += std::pow(static_cast<long double>(a), q);
        weighted += wq;
        if (M.point(i).cwiseAbs().maxCoeff() >= band) tail += wq;
    }
    MolecularNorm out;
    if (std::isinf(q)) {
        out.lq = static_cast<double>(pmax);
        out.weighted = static_cast<double>(wmax);
    } else {
        const long double cell = M.cell();
        out.lq = static_cast<double>(std::pow(plain * cell, 1.0L / q));
        out.weighted = static_cast<double>(std::pow(weighted * cell, 1.0L / q));
        out.tail_fraction = weighted > 0 ? static_cast<double>(tail / weighted) : 0.0;
    }
    out.value = std::pow(out.lq, 1.0 - quad.theta) * std::pow(out.weighted, quad.theta);
    if (!std::isfinite(out.value)) throw Error(ErrorCode::NonFinite, "molecular norm is not finite on the box");
    return out;
}

struct AtomCheck {
    bool valid = false;
    double outside_mass = 0.0;
    double size = 0.0;
    double size_bound = 0.0;
    double max_moment_residual = 0.0;
    double moment_tolerance = 0.0;
};

struct Atom {
    SampledField field;
    Vec center;
    int j = 0;
    AdmissibleTriple triple;
    double measured_size = 0.0;
    std::vector<cplx> moments;
};

/// Checks support in center + B_j, ||a||_q <= |B_j|^{1/q - 1/p} (1 + 1e-8) and
/// scaled vanishing moments up to order s.
inline AtomCheck validate_atom(const SampledField& a, const Vec& center, int j, const AdmissibleTriple& t,
                               const EllipsoidFamily& fam) {
    AtomCheck c;
    long double outside = 0.0L, l1 = 0.0L;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double v = std::abs(a.values[i]);
        if (v == 0.0) continue;
        l1 += v;
        if (!fam.contains(j, a.point(i) - center)) outside += v;
    }
    c.outside_mass = static_cast<double>(outside * a.cell());
    const double norm1 = static_cast<double>(l1 * a.cell());
    c.size = a.lq_norm(t.q);
    c.size_bound = std::pow(fam.volume(j), reciprocal(t.q) - 1.0 / t.p);
    const double diam = fam.outer_radius(j);
    const auto alphas = indices_up_to(a.grid.n, t.s);
    const auto mom = discrete_moments(a, center, t.s);
    c.moment_tolerance = 1e-8 * std::max(norm1, 1e-300);
    for (std::size_t k = 0; k < mom.size(); ++k) {
        const double scaled = std::abs(mom[k]) / std::pow(diam, alphas[k].order());
        c.max_moment_residual = std::max(c.max_moment_residual, scaled);
    }
    c.valid = c.outside_mass <= 1e-10 * std::max(norm1, 1e-300) && c.size <= c.size_bound * (1.0 + 1e-8) &&
              c.max_moment_residual <= c.moment_tolerance;
    return c;
}

/// Random atom: w (f - pi_w f), where f is an oscillatory function of
/// u = A^{-j}(x - x0), w is a C^inf bump on center + B_j and pi_w is the
/// discrete projection onto P_s in L^2(w). The moments vanish by
/// orthogonality, and the atom stays smooth, so its transform is negligible
/// near the grid cutoff.
template <class Rng>
Atom random_atom(const Grid& g, const EllipsoidFamily& fam, int j, const Vec& center, const AdmissibleTriple& t, Rng& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = g.n;
    struct Wave {
        Vec k;
        double amp, phase;
    };
    std::vector<Wave> waves;
    for (int w = 0; w < 3; ++w) {
        Vec k(n);
        for (int i = 0; i < n; ++i) k(i) = 1.5 * unif(rng);
        waves.push_back({k, unif(rng), kPi * unif(rng)});
    }
    const Mat to_unit = fam.dilation().power(-j);
    const auto alphas = indices_up_to(n, t.s);
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (fam.contains(j, g.point(Domain::Spatial, i) - center)) pts.push_back(i);
    const auto D = static_cast<Eigen::Index>(alphas.size());
    const auto npts = static_cast<Eigen::Index>(pts.size());
    if (npts < 4 * D) throw Error(ErrorCode::IllConditioned, "too few grid points inside the ellipsoid");
    Eigen::MatrixXd V(npts, D);
    Eigen::VectorXd w(npts), f(npts);
    for (Eigen::Index r = 0; r < npts; ++r) {
        const Vec x = g.point(Domain::Spatial, pts[r]) - center;
        const Vec u = to_unit * x;
        for (Eigen::Index c = 0; c < D; ++c) V(r, c) = monomial(u, alphas[c]);
        w(r) = std::exp(1.0 - 1.0 / (1.0 - fam.level(j, x)));
        double v = 0.0;
        for (const auto& wave : waves) v += wave.amp * std::cos(kTwoPi * wave.k.dot(u) + wave.phase);
        f(r) = v;
    }
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::VectorXd c = (sw.asDiagonal() * V).colPivHouseholderQr().solve(sw.cwiseProduct(f));
    const Eigen::VectorXd vals = w.cwiseProduct(f - V * c);
    SampledField field(g, Domain::Spatial);
    for (Eigen::Index r = 0; r < npts; ++r) field.values[pts[r]] = vals(r);
    Atom a;
    a.field = std::move(field);
    const double size = a.field.lq_norm(t.q);
    if (!(size > 0.0)) throw Error(ErrorCode::NormalizationDegenerate, "atom vanished after projection");
    a.field *= std::pow(fam.volume(j), reciprocal(t.q) - 1.0 / t.p) / size;
    a.center = center;
    a.j = j;
    a.triple = t;
    a.measured_size = a.field.lq_norm(t.q);
    a.moments = discrete_moments(a.field, center, t.s);
    return a;
}

/// Random molecule: a few Gaussians near x0 minus a Gaussian-weighted
/// polynomial that cancels the discrete moments up to order s.
template <class Rng>
SampledField random_molecule(const Grid& g, const Vec& center, int s, Rng& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = g.n;
    SampledField M(g, Domain::Spatial);
    for (int b = 0; b < 3; ++b) {
        Vec off(n);
        for (int i = 0; i < n; ++i) off(i) = 0.3 * unif(rng);
        const double width = 0.25 + 0.175 * (unif(rng) + 1.0);
        const double amp = unif(rng) + (b == 0 ? 2.0 : 0.0);
        for (std::size_t i = 0; i < M.values.size(); ++i) {
            const Vec x = M.point(i) - center - off;
            M.values[i] += amp * std::exp(-0.5 * x.squaredNorm() / (width * width));
        }
    }
    const auto alphas = indices_up_to(n, s);
    const auto D = static_cast<Eigen::Index>(alphas.size());
    std::vector<SampledField> corr;
    for (const auto& a : alphas) {
        corr.push_back(SampledField::from_function(g, Domain::Spatial, [&](const Vec& x) {
            const Vec u = x - center;
            return cplx(monomial(u, a) * std::exp(-0.5 * u.squaredNorm() / 0.25));
        }));
    }
    Eigen::MatrixXd sys(D, D);
    Eigen::VectorXd rhs(D);
    const auto mM = discrete_moments(M, center, s);
    for (Eigen::Index c = 0; c < D; ++c) {
        const auto mc = discrete_moments(corr[c], center, s);
        for (Eigen::Index r = 0; r < D; ++r) sys(r, c) = mc[r].real();
    }
    for (Eigen::Index r = 0; r < D; ++r) rhs(r) = mM[r].real();
    Eigen::VectorXd coef = sys.colPivHouseholderQr().solve(rhs);
    for (Eigen::Index c = 0; c < D; ++c) M -= corr[c] * cplx(coef(c));
    return M;
}

struct DecompositionTerm {
    /// The atom for this term lives on center + B_scale.
    int scale = 0;
    double mu = 0.0;
    SampledField atom;
    AtomCheck check;
};

struct AtomicDecomposition {
    double normalization = 1.0;
    double sigma = 0.0;
    int k_start = 0;
    double r = 0.0;
    double C0 = 0.0;
    double measured_C = 0.0;
    double coeff_sum = 0.0;
    double bound = 0.0;
    double drop_threshold = 0.0;
    int dropped_terms = 0;
    /// Leading scales whose ellipsoid holds too few grid points to fit P_s.
    int unresolved_scales = 0;
    std::vector<DecompositionTerm> terms;
    /// ||M - g_{k+J+1}||_1 / ||M||_1 after each added term, for the normalised M.
    std::vector<double> reconstruction_error_L1;
    std::vector<double> projection_l1;
    bool all_atoms_valid = true;
};

/// Telescoping decomposition M = g_k + sum_{j>=k} (g_{j+1} - g_j) with
/// g_j = (M - pi_{B_j} M) 1_{B_j}. Each term is factored exactly as
/// mu * atom with the atom meeting its size bound with equality.
inline AtomicDecomposition decompose_molecule(const SampledField& M_in, const Vec& center, const AdmissibleQuadruple& quad,
                                              const RhoTable& rho, int J_max, double continuous_C0 = 0.0) {
    const auto& fam = rho.quasinorm().family();
    const auto& t = quad.triple;
    const double b = fam.dilation().det_abs();
    const double expo = reciprocal(t.q) - 1.0 / t.p;
    AtomicDecomposition dec;

    const auto nm = molecular_norm(M_in, center, quad, rho);
    if (!(nm.value > 0.0)) throw Error(ErrorCode::NormalizationDegenerate, "molecule has zero norm");
    dec.normalization = nm.value;
    const SampledField M = M_in * cplx(1.0 / nm.value);

    const double lq = M.lq_norm(t.q);
    dec.sigma = std::pow(lq, 1.0 / expo);
    dec.k_start = static_cast<int>(std::floor(std::log(dec.sigma) / std::log(b) + 1e-12));
    dec.r = quad.d * (1.0 - quad.theta);

    const int k = dec.k_start;
    std::vector<SampledField> g;
    double c0 = continuous_C0;
    // On an unresolved ellipsoid every grid function agrees with a polynomial
    // of degree s, so g_j vanishes there and the telescoping stays exact.
    const std::size_t min_points = 2 * indices_up_to(M.grid.n, t.s).size();
    bool first = true;
    for (int j = k; j <= k + J_max + 1; ++j) {
        if (DiscreteProjector::count_inside(M.grid, fam, j, center) < min_points) {
            g.emplace_back(M.grid, Domain::Spatial);
            dec.projection_l1.push_back(0.0);
            ++dec.unresolved_scales;
            continue;
        }
        DiscreteProjector proj(M.grid, fam, j, center, t.s);
        if (first) c0 = std::max(c0, proj.C0());
        first = false;
        g.push_back(proj.complement(M));
        dec.projection_l1.push_back(proj.project(M).lq_norm(1.0));
    }
    dec.C0 = c0;

    const double m1 = M.lq_norm(1.0);
    dec.drop_threshold = 1e-10 * m1;
    auto add_term = [&](int scale, SampledField piece) {
        DecompositionTerm term;
        term.scale = scale;
        const double size = piece.lq_norm(t.q);
        term.mu = size / std::pow(b, scale * expo);
        term.atom = std::move(piece);
        term.atom *= cplx(1.0 / term.mu);
        term.check = validate_atom(term.atom, center, scale, t, fam);
        dec.all_atoms_valid = dec.all_atoms_valid && term.check.valid;
        dec.terms.push_back(std::move(term));
    };
    if (g[0].lq_norm(1.0) <= dec.drop_threshold) {
        ++dec.dropped_terms;
    } else {
        add_term(k, g[0]);
    }
    for (int idx = 0; idx <= J_max; ++idx) {
        SampledField diff = g[idx + 1] - g[idx];
        if (diff.lq_norm(1.0) <= dec.drop_threshold) {
            ++dec.dropped_terms;
        } else {
            add_term(k + idx + 1, std::move(diff));
        }
        dec.reconstruction_error_L1.push_back((M - g[idx + 1]).lq_norm(1.0) / m1);
    }

    double sum = 0.0;
    for (const auto& term : dec.terms) {
        sum += std::pow(term.mu, t.p);
        if (term.scale > k) dec.measured_C = std::max(dec.measured_C, term.mu * std::pow(b, (term.scale - 1 - k) * dec.r));
    }
    dec.coeff_sum = sum;
    dec.bound = std::pow(1.0 + dec.C0, t.p) + std::pow(dec.measured_C, t.p) / (1.0 - std::pow(b, -dec.r * t.p));
    return dec;
}

} // namespace aniso
