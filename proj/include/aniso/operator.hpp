#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "aniso/atoms.hpp"
#include "aniso/field.hpp"
#include "aniso/mihlin.hpp"
#include "aniso/partition.hpp"

namespace aniso {

/// m on the frequency grid of g. The origin takes the value at the first
/// grid frequency along e_1, a fixed ray, so sampled symbols still multiply.
inline SampledField sample_symbol(const Multiplier& m, const Grid& g) {
    SampledField out(g, Domain::Frequency);
    Vec ray = Vec::Zero(g.n);
    ray(0) = g.freq_spacing();
    const cplx at_origin = m(ray);
    parallel_for(out.values.size(), [&](std::size_t k) {
        Vec xi = out.point(k);
        out.values[k] = xi.isZero(0.0) ? at_origin : m(xi);
    });
    return out;
}

/// T f = (m fhat)^vee with m already sampled.
inline SampledField apply_sampled(const SampledField& symbol, const SampledField& f) {
    if (symbol.domain != Domain::Frequency || !(symbol.grid == f.grid))
        throw Error(ErrorCode::TagMismatch, "symbol and field grids differ");
    SampledField fh = dft(f);
    for (std::size_t k = 0; k < fh.values.size(); ++k) fh.values[k] *= symbol.values[k];
    return idft(fh);
}

inline SampledField apply_multiplier(const Multiplier& m, const SampledField& f) {
    return apply_sampled(sample_symbol(m, f.grid), f);
}

/// Truncated radial maximal function sup_{k_lo <= k <= k_hi} |f * phi_k|
/// with phihat = eta, so phihat_k(xi) = eta((A^*)^{-k} xi) and int phi = 1.
/// The resulting L^p quasi-norm is a proxy for the Hardy-space norm.
class HpProxy {
public:
    HpProxy(std::shared_ptr<const LPPartition> part, int k_lo, int k_hi, double p)
        : part_(std::move(part)), k_lo_(k_lo), k_hi_(k_hi), p_(p) {
        if (k_lo > k_hi) throw Error(ErrorCode::InvalidArgument, "empty scale range");
        if (!(p > 0.0)) throw Error(ErrorCode::BadP, "p must be positive");
    }

    int k_lo() const { return k_lo_; }
    int k_hi() const { return k_hi_; }
    double p() const { return p_; }
    HpProxy with_range(int lo, int hi) const { return HpProxy(part_, lo, hi, p_); }
    HpProxy with_p(double p) const { return HpProxy(part_, k_lo_, k_hi_, p); }

    SampledField radial_maximal(const SampledField& f) const {
        if (f.domain != Domain::Spatial) throw Error(ErrorCode::TagMismatch, "expects a spatial field");
        const SampledField fh = dft(f);
        SampledField out(f.grid, Domain::Spatial);
        for (int k = k_lo_; k <= k_hi_; ++k) {
            const auto& window = bump(f.grid, k);
            SampledField prod = fh;
            for (std::size_t i = 0; i < prod.values.size(); ++i) prod.values[i] *= window[i];
            const SampledField conv = idft(prod);
            for (std::size_t i = 0; i < out.values.size(); ++i)
                out.values[i] = std::max(out.values[i].real(), std::abs(conv.values[i]));
        }
        return out;
    }

    double norm(const SampledField& f) const { return radial_maximal(f).lq_norm(p_); }

private:
    const std::vector<double>& bump(const Grid& g, int k) const {
        auto key = std::make_tuple(g.n, g.points, g.extent, k);
        std::lock_guard lock(*mu_);
        auto it = cache_->find(key);
        if (it != cache_->end()) return it->second;
        std::vector<double> w(g.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = part_->eta_at(k, g.point(Domain::Frequency, i));
        return cache_->emplace(key, std::move(w)).first->second;
    }

    std::shared_ptr<const LPPartition> part_;
    int k_lo_, k_hi_;
    double p_;
    std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
    std::shared_ptr<std::map<std::tuple<int, int, double, int>, std::vector<double>>> cache_ =
        std::make_shared<std::map<std::tuple<int, int, double, int>, std::vector<double>>>();
};

struct FourierDecayFit {
    double C = 0.0;
    std::size_t violations = 0;
    cplx at_origin = 0.0;
    double proxy = 0.0;
};

/// Smallest C with |ahat(xi)| <= C proxy rho_*(xi)^{1/p - 1} over the nonzero
/// grid frequencies. The proxy norm of the atom comes in precomputed, so
/// several exponents can share one maximal function.
inline FourierDecayFit atom_fourier_decay(const SampledField& a, double p, double proxy_norm, const RhoTable& rho_star) {
    if (a.domain != Domain::Spatial) throw Error(ErrorCode::TagMismatch, "expects a spatial field");
    FourierDecayFit fit;
    fit.proxy = proxy_norm;
    const SampledField ah = dft(a);
    const auto table = rho_star.get(a.grid, Vec::Zero(a.grid.n), Domain::Frequency);
    const double e = 1.0 / p - 1.0;
    std::vector<double> ratio(ah.values.size(), 0.0);
    for (std::size_t k = 0; k < ah.values.size(); ++k) {
        const double r = (*table)[k];
        if (r == 0.0) {
            fit.at_origin = ah.values[k];
            continue;
        }
        ratio[k] = std::abs(ah.values[k]) / (fit.proxy * std::pow(r, e));
        fit.C = std::max(fit.C, ratio[k]);
    }
    const double c = fit.C * (1.0 + 1e-12);
    for (double v : ratio)
        if (v > c) ++fit.violations;
    return fit;
}

inline FourierDecayFit atom_fourier_decay(const SampledField& a, double p, const HpProxy& proxy, const RhoTable& rho_star) {
    return atom_fourier_decay(a, p, proxy.norm(a), rho_star);
}

struct UniformBoundRow {
    std::size_t id = 0;
    int j = 0;
    Vec center;
    double N = 0.0;
    double lq = 0.0;
    double weighted = 0.0;
    double tail_fraction = 0.0;
    double moment_residual = 0.0;
};

struct UniformBoundReport {
    std::vector<UniformBoundRow> rows;
    double max_over_atoms = 0.0;
    double median = 0.0;
    bool pass = false;
    double max_moment_residual = 0.0;
};

/// N(T_m a) over an atom family; pass when max / median < 3.
inline UniformBoundReport uniform_molecule_bound(const SampledField& symbol, const std::vector<Atom>& atoms,
                                                 const AdmissibleQuadruple& quad, const RhoTable& rho) {
    UniformBoundReport rep;
    rep.rows.resize(atoms.size());
    parallel_for(atoms.size(), [&](std::size_t i) {
        const auto& a = atoms[i];
        const SampledField ta = apply_sampled(symbol, a.field);
        auto nm = molecular_norm(ta, a.center, quad, rho);
        auto& row = rep.rows[i];
        row.id = i;
        row.j = a.j;
        row.center = a.center;
        row.N = nm.value;
        row.lq = nm.lq;
        row.weighted = nm.weighted;
        row.tail_fraction = nm.tail_fraction;
        const auto mom = discrete_moments(ta, a.center, quad.triple.s);
        const double l1 = ta.lq_norm(1.0);
        for (const auto& m : mom) row.moment_residual = std::max(row.moment_residual, std::abs(m) / l1);
    });
    std::vector<double> ns;
    for (const auto& r : rep.rows) {
        ns.push_back(r.N);
        rep.max_over_atoms = std::max(rep.max_over_atoms, r.N);
        rep.max_moment_residual = std::max(rep.max_moment_residual, r.moment_residual);
    }
    if (ns.empty()) return rep;
    std::sort(ns.begin(), ns.end());
    const std::size_t h = ns.size() / 2;
    rep.median = ns.size() % 2 ? ns[h] : 0.5 * (ns[h - 1] + ns[h]);
    rep.pass = std::all_of(ns.begin(), ns.end(), [](double v) { return std::isfinite(v); }) &&
               rep.max_over_atoms < 3.0 * rep.median;
    return rep;
}

/// sup over center + B_{j+l+1} \ B_{j+l} of |Ta| b^{l (R zeta_- + 1)} |B_j|^{1/p}
/// for l = 1..shells; stays bounded when the far field decays as the
/// molecular estimate predicts.
inline std::vector<double> far_field_profile(const SampledField& ta, const Atom& a, const StepQuasiNorm& q, int R, int shells) {
    const auto& fam = q.family();
    const double b = fam.dilation().det_abs();
    const double rate = R * fam.dilation().zeta_minus() + 1.0;
    std::vector<double> sup(shells, 0.0);
    for (std::size_t i = 0; i < ta.values.size(); ++i) {
        const Vec x = ta.point(i) - a.center;
        auto idx = q.scale_index(x);
        if (!idx) continue;
        const int l = *idx - a.j;
        if (l < 1 || l > shells) continue;
        sup[l - 1] = std::max(sup[l - 1], std::abs(ta.values[i]));
    }
    for (int l = 1; l <= shells; ++l)
        sup[l - 1] *= std::pow(b, l * rate) * std::pow(fam.volume(a.j), 1.0 / a.triple.p);
    return sup;
}

} // namespace aniso
