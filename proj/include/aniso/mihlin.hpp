#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aniso/partition.hpp"

namespace aniso {

/// A multiplier symbol on R^n \ {0}. The optional derivative oracle returns
/// d^gamma m(xi), or nullopt when it has no closed form for that order.
struct Multiplier {
    std::string name;
    std::function<cplx(const Vec&)> eval;
    std::function<std::optional<cplx>(const MultiIndex&, const Vec&)> derivative;
    bool invariant = false;

    cplx operator()(const Vec& xi) const { return eval(xi); }
};

/// Finite-difference step for order |beta| in units of the inner radius of B_0^*.
inline double fd_step_factor(int order) {
    if (order <= 2) return 1e-3;
    if (order <= 4) return 1e-2;
    return 3e-2;
}

/// Nested central differences: the k-th difference along axis i samples
/// F(u + (k/2 - l) h e_i) with weights (-1)^l C(k, l) / h^k.
inline cplx central_difference(const std::function<cplx(const Vec&)>& f, const Vec& u, const MultiIndex& beta, double h) {
    const int n = beta.n;
    std::vector<std::pair<Vec, double>> nodes{{u, 1.0}};
    for (int i = 0; i < n; ++i) {
        const int k = beta.e[i];
        if (k == 0) continue;
        std::vector<std::pair<Vec, double>> next;
        for (const auto& [x, w] : nodes) {
            for (int l = 0; l <= k; ++l) {
                Vec y = x;
                y(i) += (0.5 * k - l) * h;
                double c = binomial(k, l) * ((l & 1) ? -1.0 : 1.0) / std::pow(h, k);
                next.emplace_back(y, w * c);
            }
        }
        nodes = std::move(next);
    }
    cplx acc = 0.0;
    for (const auto& [x, w] : nodes) acc += w * f(x);
    return acc;
}

/// d^beta (m o (A^*)^j) evaluated at u = (A^*)^{-j} xi.
///
/// With a derivative oracle the chain rule is expanded exactly; otherwise
/// nested central differences are taken in the u coordinate.
inline cplx aniso_derivative(const Multiplier& m, const LPPartition& part, int j, const MultiIndex& beta, const Vec& xi,
                             int max_order = 6) {
    if (beta.order() > max_order || beta.order() > 6)
        throw Error(ErrorCode::DerivativeOrderExceeded, "derivative order above the supported maximum");
    const auto& fam = part.family_star();
    if (!(!fam.contains(j, xi) && fam.contains(j + 1, xi)))
        throw Error(ErrorCode::OutsideShell, "xi outside the shell B*_{j+1} \\ B*_j");
    const Mat aj = fam.dilation().power(j);
    const Vec u = fam.dilation().power(-j) * xi;
    if (m.derivative) {
        bool ok = true;
        cplx acc = 0.0;
        for (const auto& [gamma, c] : linear_chain_rule(aj, beta)) {
            auto v = m.derivative(gamma, xi);
            if (!v) {
                ok = false;
                break;
            }
            acc += c * *v;
        }
        if (ok) return acc;
    }
    if (beta.order() == 0) return m(xi);
    const double h = fd_step_factor(beta.order()) * fam.inner_radius(0);
    // m o (A^*)^j = m for invariant symbols; differencing m itself avoids
    // amplifying the rounding of the round trip through (A^*)^j.
    if (m.invariant) return central_difference(m.eval, u, beta, h);
    return central_difference([&](const Vec& v) { return m(aj * v); }, u, beta, h);
}

struct MihlinCell {
    int j = 0;
    MultiIndex beta;
    double sup = 0.0;
};

struct MihlinReport {
    int N = 0;
    int j_lo = 0, j_hi = 0;
    std::vector<MihlinCell> cells;
    double constant = 0.0;
    int samples_per_shell = 0;
    std::string fd_policy;

    double cell(int j, const MultiIndex& beta) const {
        for (const auto& c : cells)
            if (c.j == j && c.beta == beta) return c.sup;
        throw Error(ErrorCode::InvalidArgument, "no such Mihlin cell");
    }
};

/// Unit-shell samples u in B_1^* \ B_0^*: Halton points, or uniform draws
/// when a seed is given.
inline std::vector<Vec> unit_shell_samples(const EllipsoidFamily& fam, int count, std::optional<std::uint64_t> seed = std::nullopt) {
    std::vector<Vec> out;
    out.reserve(count);
    std::mt19937_64 rng(seed.value_or(0));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        double t1, t2, t;
        if (seed) {
            t1 = unif(rng);
            t2 = unif(rng);
            t = unif(rng);
        } else {
            const auto idx = static_cast<std::uint64_t>(i) + 1;
            t1 = halton(idx, 2);
            t2 = halton(idx, 3);
            t = halton(idx, 5);
        }
        // Keep off the seams so every sample lies strictly inside the shell.
        t = 1e-6 + (1.0 - 2e-6) * t;
        out.push_back(fam.shell_point(0, t1, t2, t));
    }
    return out;
}

inline MihlinReport mihlin_constant(const Multiplier& m, const LPPartition& part, int N, int j_lo = -8, int j_hi = 8,
                                    int samples_per_shell = 1000, std::optional<std::uint64_t> seed = std::nullopt) {
    if (N < 0) throw Error(ErrorCode::InvalidArgument, "order must be nonnegative");
    if (j_lo > j_hi) throw Error(ErrorCode::InvalidArgument, "empty scale range");
    const auto& fam = part.family_star();
    const int n = fam.dim();
    const auto samples = unit_shell_samples(fam, samples_per_shell, seed);
    const auto betas = indices_up_to(n, N);

    MihlinReport rep;
    rep.N = N;
    rep.j_lo = j_lo;
    rep.j_hi = j_hi;
    rep.samples_per_shell = samples_per_shell;
    rep.fd_policy = "central differences in u, h = {1e-3, 1e-2, 3e-2} x inner radius of B0* for orders {<=2, 3-4, >=5}";
    for (int j = j_lo; j <= j_hi; ++j)
        for (const auto& b : betas) rep.cells.push_back({j, b, 0.0});

    parallel_for(rep.cells.size(), [&](std::size_t c) {
        auto& cell = rep.cells[c];
        const Mat aj = fam.dilation().power(cell.j);
        double sup = 0.0;
        for (const auto& u : samples) {
            cplx v = aniso_derivative(m, part, cell.j, cell.beta, aj * u, N);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw Error(ErrorCode::NonFinite, "symbol " + m.name + " is not finite on shell " + std::to_string(cell.j));
            sup = std::max(sup, std::abs(v));
        }
        cell.sup = sup;
    });
    for (const auto& c : rep.cells) rep.constant = std::max(rep.constant, c.sup);
    return rep;
}

/// m o (A^*)^k, where d is the primal dilation A.
inline Multiplier dilate_multiplier(const Multiplier& m, const Dilation& d, int k) {
    if (k == 0) return m;
    const Mat ak = d.adjoint_power(k);
    Multiplier out;
    out.name = m.name + "@" + std::to_string(k);
    out.invariant = m.invariant;
    out.eval = [ev = m.eval, ak](const Vec& xi) { return ev(ak * xi); };
    if (m.derivative) {
        out.derivative = [dv = m.derivative, ak](const MultiIndex& g, const Vec& xi) -> std::optional<cplx> {
            cplx acc = 0.0;
            for (const auto& [gamma, c] : linear_chain_rule(ak, g)) {
                auto v = dv(gamma, ak * xi);
                if (!v) return std::nullopt;
                acc += c * *v;
            }
            return acc;
        };
    }
    return out;
}

/// Built-in symbols. The partition is shared by the symbols that need it.
class MultiplierCatalog {
public:
    explicit MultiplierCatalog(const Dilation& d) : part_(std::make_shared<LPPartition>(build_partition(d))) {
        const int n = d.dim();
        auto part = part_;
        const double lnb = std::log(d.det_abs());

        add({"one", [](const Vec&) { return cplx(1.0); },
             [](const MultiIndex& g, const Vec&) -> std::optional<cplx> { return g.order() == 0 ? 1.0 : 0.0; }, true});

        add({"aniso_phase", [part](const Vec& xi) { return std::polar(1.0, kTwoPi * part->log_scale(xi)); }, {}, true});

        add({"aniso_angular",
             [part, n](const Vec& xi) {
                 auto j0 = part->shell_of(xi);
                 if (!j0) throw Error(ErrorCode::InvalidArgument, "symbol undefined at the origin");
                 const auto& dil = part->family_star().dilation();
                 cplx acc = 0.0;
                 for (int j = *j0 - 1; j <= *j0 + 2; ++j) {
                     double w = part->psi_hat_j(j, xi);
                     if (w == 0.0) continue;
                     Vec u = dil.power(-j) * xi;
                     double phase = u(0) + (n > 1 ? 0.5 * u(1) : 0.0);
                     acc += w * std::polar(1.0, kTwoPi * phase);
                 }
                 return acc;
             },
             {}, true});

        const double tau = 1.0;
        add({"rho_power", [part, tau, lnb](const Vec& xi) { return std::polar(1.0, tau * lnb * part->log_scale(xi)); }, {}, false});

        for (int k = 0; k < n && n > 1; ++k) {
            add({"riesz" + std::to_string(k + 1), [k](const Vec& xi) { return cplx(xi(k) / xi.norm()); },
                 [k](const MultiIndex& g, const Vec& xi) -> std::optional<cplx> {
                     const double r = xi.norm();
                     if (g.order() == 0) return xi(k) / r;
                     if (g.order() == 1) {
                         int i = 0;
                         while (g.e[i] == 0) ++i;
                         return ((i == k ? 1.0 : 0.0) - xi(k) * xi(i) / (r * r)) / r;
                     }
                     return std::nullopt;
                 },
                 false});
        }
    }

    const LPPartition& partition() const { return *part_; }
    std::shared_ptr<const LPPartition> partition_ptr() const { return part_; }

    const Multiplier& get(const std::string& name) const {
        auto it = items_.find(name);
        if (it == items_.end()) throw Error(ErrorCode::InvalidArgument, "unknown symbol " + name);
        return it->second;
    }
    bool has(const std::string& name) const { return items_.count(name) != 0; }
    std::vector<std::string> names() const { return order_; }

private:
    void add(Multiplier m) {
        order_.push_back(m.name);
        items_.emplace(m.name, std::move(m));
    }

    std::shared_ptr<LPPartition> part_;
    std::map<std::string, Multiplier> items_;
    std::vector<std::string> order_;
};

inline MultiplierCatalog builtin_multipliers(const Dilation& d) { return MultiplierCatalog(d); }

} // namespace aniso
