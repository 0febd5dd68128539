#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "aniso/exponents.hpp"
#include "aniso/field.hpp"
#include "aniso/mihlin.hpp"
#include "aniso/partition.hpp"
#include "aniso/quasinorm.hpp"

namespace aniso {

/// K_j = (m psi_hat_j)^vee on a grid, with its frequency samples m_j.
struct KernelSlice {
    int j = 0;
    SampledField spatial;
    SampledField symbol;
    std::size_t shell_points = 0;
};

/// Grid of P points per axis whose frequency box is 1.2 times the bounding
/// box of B*_{j+1}.
inline Grid shell_grid(const LPPartition& part, int j, int points) {
    const auto& fam = part.family_star();
    double ext = 0.0;
    for (int i = 0; i < fam.dim(); ++i) ext = std::max(ext, fam.axis_extent(j + 1, i));
    return Grid(fam.dim(), points, points / (4.0 * 1.2 * ext));
}

inline KernelSlice kernel_piece(const Multiplier& m, const LPPartition& part, int j, const Grid& g) {
    const auto& fam = part.family_star();
    if (g.n != fam.dim()) throw Error(ErrorCode::InvalidArgument, "grid dimension mismatch");
    const double half = 0.5 * g.points * g.freq_spacing();
    for (int i = 0; i < g.n; ++i)
        if (fam.axis_extent(j + 1, i) >= half)
            throw Error(ErrorCode::ShellUnresolved, "shell " + std::to_string(j) + " exceeds the frequency box");
    KernelSlice out;
    out.j = j;
    out.symbol = SampledField(g, Domain::Frequency);
    std::vector<char> inside(g.size(), 0);
    parallel_for(g.size(), [&](std::size_t k) {
        Vec xi = out.symbol.point(k);
        if (xi.isZero(0.0)) return;
        double w = part.psi_hat_j(j, xi);
        if (w == 0.0) return;
        inside[k] = 1;
        out.symbol.values[k] = w * m(xi);
    });
    out.shell_points = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 1));
    if (out.shell_points < 8)
        throw Error(ErrorCode::ShellUnresolved, "fewer than 8 grid points in shell " + std::to_string(j));
    out.spatial = idft(out.symbol);
    return out;
}

/// Fraction of the frequency energy of K_j inside the closed shell
/// B*_{j+1} \ B*_{j-1}.
inline double slice_support_fraction(const KernelSlice& s, const LPPartition& part) {
    const auto& fam = part.family_star();
    SampledField back = dft(s.spatial);
    long double in = 0.0, total = 0.0;
    for (std::size_t k = 0; k < back.values.size(); ++k) {
        const double e = std::norm(back.values[k]);
        total += e;
        const Vec xi = back.point(k);
        if (fam.level(s.j - 1, xi) >= 1.0 && fam.level(s.j + 1, xi) <= 1.0) in += e;
    }
    return total > 0 ? static_cast<double>(in / total) : 1.0;
}

/// |‖K_j‖_2 - ‖m_j‖_2| / ‖m_j‖_2.
inline double slice_plancherel_gap(const KernelSlice& s) {
    const double a = s.spatial.l2_norm(), b = s.symbol.l2_norm();
    return std::abs(a - b) / b;
}

/// Deterministic points of B_1 \ B_0 (primal family).
inline std::vector<Vec> unit_shell_probes(const EllipsoidFamily& fam, int count, std::uint64_t offset = 0) {
    std::vector<Vec> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto idx = offset + static_cast<std::uint64_t>(i) + 1;
        double t = 0.02 + 0.96 * halton(idx, 5);
        out.push_back(fam.shell_point(0, halton(idx, 2), halton(idx, 3), t));
    }
    return out;
}

/// sup over unit-shell samples u of b^k |d^alpha (K o A^k)(u)|, taken from
/// spectral derivatives of a gridded kernel.
inline double cz_seminorm(const SampledField& K, const StepQuasiNorm& q, const MultiIndex& alpha, int k, int samples = 200) {
    if (K.domain != Domain::Spatial) throw Error(ErrorCode::TagMismatch, "kernel must be a spatial field");
    if (alpha.order() > 6) throw Error(ErrorCode::DerivativeOrderExceeded, "derivative order above 6");
    const auto& fam = q.family();
    const Grid& g = K.grid;
    const double top = g.origin(Domain::Spatial) + (g.points - 1) * g.spacing();
    for (int i = 0; i < g.n; ++i)
        if (fam.axis_extent(k + 1, i) >= top)
            throw Error(ErrorCode::ShellOutsideBox, "shell " + std::to_string(k) + " leaves the grid box");
    const Mat ak = fam.dilation().power(k);
    const auto terms = linear_chain_rule(ak, alpha);
    std::vector<SampledField> parts;
    for (const auto& [gamma, c] : terms) parts.push_back(spectral_derivative(K, gamma));
    double sup = 0.0;
    for (const auto& u : unit_shell_probes(fam, samples)) {
        const Vec x = ak * u;
        cplx acc = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) acc += terms[t].second * interpolate(parts[t], x);
        sup = std::max(sup, std::abs(acc));
    }
    return sup * std::pow(fam.dilation().det_abs(), k);
}

/// Off-grid evaluation of d^beta K_j at arbitrary points:
///   d^beta K_j(x) = b^j int (2 pi i (A^*)^j v)^beta m((A^*)^j v) psi_hat(v)
///                   e^{2 pi i <A^j x, v>} dv
/// by the midpoint rule on the bounding box of B_1^*. The integrand is smooth
/// and compactly supported, so the rule converges spectrally once the node
/// spacing resolves twice the largest |A^j x| plus a margin.
class KernelProbe {
public:
    static constexpr int kMinNodes = 128;
    static constexpr int kMaxNodes = 2048;

    KernelProbe(const Multiplier& m, const LPPartition& part) : m_(m), part_(part) {}

    /// values[b][p] = d^{betas[b]} K_j(points[p]).
    std::vector<std::vector<cplx>> evaluate(int j, const std::vector<MultiIndex>& betas, const std::vector<Vec>& points) const {
        const auto& fam = part_.family_star();
        const auto& dstar = fam.dilation();
        const int n = fam.dim();
        if (n > 2) throw Error(ErrorCode::Unsupported, "kernel probes support dimensions 1 and 2");
        const Mat aj_primal = dstar.power(j).transpose();
        const Mat astar_j = dstar.power(j);

        std::vector<Vec> ys;
        double ymax = 0.0;
        for (const auto& x : points) {
            ys.push_back(aj_primal * x);
            ymax = std::max(ymax, ys.back().cwiseAbs().maxCoeff());
        }
        std::array<int, 2> nodes{1, 1};
        std::array<double, 2> ext{0, 0}, dv{0, 0};
        for (int i = 0; i < n; ++i) {
            ext[i] = fam.axis_extent(1, i);
            int need = static_cast<int>(std::ceil(2.0 * ext[i] * 2.0 * (ymax + 12.0)));
            if (need > kMaxNodes)
                throw Error(ErrorCode::ShellUnresolved, "probe points too far out for shell " + std::to_string(j));
            nodes[i] = std::max(kMinNodes, need);
            dv[i] = 2.0 * ext[i] / nodes[i];
        }
        auto node = [&](int i, int l) { return -ext[i] + (l + 0.5) * dv[i]; };

        const std::size_t total = static_cast<std::size_t>(nodes[0]) * nodes[1];
        const double weight = std::pow(dstar.det_abs(), j) * dv[0] * (n > 1 ? dv[1] : 1.0);
        std::vector<cplx> base(total, 0.0);
        parallel_for(static_cast<std::size_t>(nodes[0]), [&](std::size_t l0) {
            Vec v(n);
            v(0) = node(0, static_cast<int>(l0));
            for (int l1 = 0; l1 < nodes[1]; ++l1) {
                if (n > 1) v(1) = node(1, l1);
                double w = part_.psi_hat(v);
                if (w == 0.0) continue;
                base[l0 * nodes[1] + l1] = weight * w * m_(astar_j * v);
            }
        });

        std::vector<std::vector<cplx>> out(betas.size(), std::vector<cplx>(points.size()));
        for (std::size_t b = 0; b < betas.size(); ++b) {
            std::vector<cplx> f = base;
            if (betas[b].order() > 0) {
                for (std::size_t idx = 0; idx < total; ++idx) {
                    if (f[idx] == 0.0) continue;
                    Vec v(n);
                    v(0) = node(0, static_cast<int>(idx / nodes[1]));
                    if (n > 1) v(1) = node(1, static_cast<int>(idx % nodes[1]));
                    Vec xi = astar_j * v;
                    std::array<cplx, 3> z{};
                    for (int i = 0; i < n; ++i) z[i] = cplx(0.0, kTwoPi * xi(i));
                    f[idx] *= monomial(z, betas[b]);
                }
            }
            parallel_for(points.size(), [&](std::size_t p) {
                std::vector<cplx> e0(nodes[0]), e1(nodes[1]);
                for (int l = 0; l < nodes[0]; ++l) e0[l] = std::polar(1.0, kTwoPi * ys[p](0) * node(0, l));
                for (int l = 0; l < nodes[1]; ++l) e1[l] = n > 1 ? std::polar(1.0, kTwoPi * ys[p](1) * node(1, l)) : 1.0;
                cplx acc = 0.0;
                for (int l0 = 0; l0 < nodes[0]; ++l0) {
                    const cplx* row = &f[static_cast<std::size_t>(l0) * nodes[1]];
                    cplx r = 0.0;
                    for (int l1 = 0; l1 < nodes[1]; ++l1) r += row[l1] * e1[l1];
                    acc += e0[l0] * r;
                }
                out[b][p] = acc;
            });
        }
        return out;
    }

private:
    const Multiplier& m_;
    const LPPartition& part_;
};

struct DecayCell {
    int k = 0;
    MultiIndex alpha;
    double S = 0.0;
};

struct DecayReport {
    std::vector<DecayCell> cells;
    std::vector<MultiIndex> alphas;
    std::vector<bool> alpha_pass;
    /// -1 when nothing was probed or no order passes.
    int fitted_order = -1;
    double constant = 0.0;
    RRange r_range;
    bool consistent = false;
    int J = 8;
    int samples = 0;
    /// Per frequency shell i: mean of 1 - sum_{|j|<=J} psi_hat_j over samples.
    std::vector<std::pair<int, double>> partition_remainder;
};

/// Sum over |j| <= J of d^alpha K_j at the given points, in ascending j.
inline std::vector<std::vector<cplx>> kernel_sum(const Multiplier& m, const LPPartition& part, int J,
                                                 const std::vector<MultiIndex>& alphas, const std::vector<Vec>& points) {
    KernelProbe probe(m, part);
    std::vector<std::vector<cplx>> acc(alphas.size(), std::vector<cplx>(points.size(), 0.0));
    for (int j = -J; j <= J; ++j) {
        auto v = probe.evaluate(j, alphas, points);
        for (std::size_t a = 0; a < alphas.size(); ++a)
            for (std::size_t p = 0; p < points.size(); ++p) acc[a][p] += v[a][p];
    }
    return acc;
}

/// S(k, alpha) for the kernel of m, using
///   b^k d^alpha (K o A^k)(u) = sum_j d^alpha K_j^{(m o (A^*)^{-k})}(u),
/// so every shell k reduces to unit-shell probes of a dilated symbol. The
/// j window |j| <= J is taken in this reduced frame.
inline DecayReport decay_sweep(const Multiplier& m, const LPPartition& part, const StepQuasiNorm& q, int N,
                               const std::vector<MultiIndex>& alphas, int k_lo, int k_hi, int J = 8, int samples = 48) {
    DecayReport rep;
    rep.J = J;
    rep.samples = samples;
    rep.alphas = alphas;
    rep.r_range = dw_R_range(q.dilation(), N);
    if (k_lo > k_hi || alphas.empty()) return rep;

    const auto probes = unit_shell_probes(q.family(), samples);
    for (int k = k_lo; k <= k_hi; ++k) {
        Multiplier mk = dilate_multiplier(m, q.dilation(), -k);
        auto sums = kernel_sum(mk, part, J, alphas, probes);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            double sup = 0.0;
            for (const auto& v : sums[a]) sup = std::max(sup, std::abs(v));
            rep.cells.push_back({k, alphas[a], sup});
            rep.constant = std::max(rep.constant, sup);
        }
    }

    int max_order = 0;
    for (const auto& a : alphas) max_order = std::max(max_order, a.order());
    std::vector<bool> order_ok(max_order + 1, true);
    for (const auto& a : alphas) {
        std::vector<double> s;
        for (const auto& c : rep.cells)
            if (c.alpha == a) s.push_back(c.S);
        std::vector<double> sorted = s;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        const bool pass = std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); }) &&
                          sorted.back() <= 10.0 * median;
        rep.alpha_pass.push_back(pass);
        if (!pass) order_ok[a.order()] = false;
    }
    for (int o = 0; o <= max_order && order_ok[o]; ++o) rep.fitted_order = o;
    rep.consistent = !rep.r_range.empty && rep.fitted_order >= rep.r_range.r_max;

    const auto& fam = part.family_star();
    for (int i = -J - 2; i <= J + 2; ++i) {
        double acc = 0.0;
        const int count = 64;
        for (int s = 0; s < count; ++s) {
            const auto idx = static_cast<std::uint64_t>(s) + 1;
            Vec xi = fam.dilation().power(i) * fam.shell_point(0, halton(idx, 2), halton(idx, 3), 0.02 + 0.96 * halton(idx, 5));
            acc += 1.0 - part.partial_sum(J, xi);
        }
        rep.partition_remainder.emplace_back(i, acc / count);
    }
    return rep;
}

struct PartialSumCheck {
    double max_relative_change = 0.0;
    int probes = 0;
    std::vector<double> totals;
};

/// Relative change of sum_{|j|<=J} |d^beta K_j(x)| between J = J1 and J = J2.
inline PartialSumCheck partial_sum_convergence(const Multiplier& m, const LPPartition& part, const EllipsoidFamily& primal,
                                               const std::vector<MultiIndex>& betas, int J1 = 6, int J2 = 8, int probes = 20) {
    const auto pts = unit_shell_probes(primal, probes, 1000);
    KernelProbe probe(m, part);
    std::vector<std::vector<double>> s1(betas.size(), std::vector<double>(pts.size(), 0.0)), s2 = s1;
    for (int j = -J2; j <= J2; ++j) {
        auto v = probe.evaluate(j, betas, pts);
        for (std::size_t b = 0; b < betas.size(); ++b)
            for (std::size_t p = 0; p < pts.size(); ++p) {
                const double a = std::abs(v[b][p]);
                if (std::abs(j) <= J1) s1[b][p] += a;
                s2[b][p] += a;
            }
    }
    PartialSumCheck out;
    out.probes = probes;
    for (std::size_t b = 0; b < betas.size(); ++b)
        for (std::size_t p = 0; p < pts.size(); ++p) {
            out.totals.push_back(s2[b][p]);
            if (s2[b][p] > 0) out.max_relative_change = std::max(out.max_relative_change, (s2[b][p] - s1[b][p]) / s2[b][p]);
        }
    return out;
}

} // namespace aniso
