#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aniso/io.hpp"

namespace aniso {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0.0;
    double limit = 0.0;
    json details = json::object();
    std::string note;
};

struct VerifyConfig {
    std::uint64_t seed = 20240611;
    /// Points per axis for the gridded checks.
    int grid = 256;
    /// Catalog symbols to exercise; empty means the whole catalog.
    std::vector<std::string> symbols;
};

inline json to_json(const CriterionResult& r) {
    json j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["pass"] = r.pass;
    j["seconds"] = r.seconds;
    j["limit_seconds"] = r.limit;
    j["details"] = r.details;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

namespace detail {

inline CriterionResult timed(int id, std::string title, double limit, const std::function<bool(json&, std::string&)>& body) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    r.limit = limit;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(r.details, r.note);
    } catch (const Error& e) {
        ok = false;
        r.note = std::string(to_string(e.code())) + ": " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = ok && r.seconds < limit;
    if (ok && !r.pass) r.note = "over the time limit";
    return r;
}

inline Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Dilation two_identity() { return Dilation(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1}); }

/// The three dilations the geometric checks run on: isotropic, diagonal
/// with unequal rates, and a strong shear.
inline std::vector<std::pair<std::string, Dilation>> geometry_cases() {
    return {{"2I", two_identity()}, {"diag(2,3)", Dilation(mat2(2, 0, 0, 3))}, {"shear", Dilation(mat2(2, 10, 0, 2))}};
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline std::vector<std::string> selected_symbols(const VerifyConfig& cfg, const MultiplierCatalog& cat) {
    if (cfg.symbols.empty()) return cat.names();
    for (const auto& s : cfg.symbols) cat.get(s);
    return cfg.symbols;
}

} // namespace detail

/// The atom family of the molecular checks for A = 2I: ten base shapes, each
/// dilated to every scale j in [-2, 2] and centered on a 3x3 lattice of
/// spacing r_j / 2. By default each scale gets its own grid whose box is
/// 20 r_j, so every atom is resolved and the box holds the same share of its
/// far field; a positive common_extent puts all scales on one grid instead.
struct ScaleFamily {
    std::vector<Grid> grids;
    std::vector<std::vector<Atom>> atoms;
    std::vector<int> scales;
};

inline double family_box_factor() { return 20.0; }

inline ScaleFamily scale_family(const StepQuasiNorm& q, const AdmissibleTriple& t, int points, std::uint64_t seed,
                                double common_extent = 0.0, int per_scale = 10) {
    ScaleFamily fam;
    for (int j = -2; j <= 2; ++j) {
        const double r = q.family().outer_radius(j);
        Grid g(q.family().dim(), points, common_extent > 0.0 ? common_extent : family_box_factor() * r);
        std::vector<Atom> row;
        for (int i = 0; i < per_scale; ++i) {
            Vec c(2);
            c << 0.5 * r * ((i % 3) - 1), 0.5 * r * (((i / 3) % 3) - 1);
            // The shape depends on i only; random_atom draws it in the unit
            // coordinate u = A^{-j}(x - c).
            std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(ss);
            row.push_back(random_atom(g, q.family(), j, c, t, rng));
        }
        fam.grids.push_back(g);
        fam.atoms.push_back(std::move(row));
        fam.scales.push_back(j);
    }
    return fam;
}

inline AdmissibleQuadruple family_quadruple(const Dilation& dil) {
    return make_quadruple(dil, make_triple(dil, 0.8, 2.0, 0), 0.8);
}

inline CriterionResult check_quasinorm_axioms(const VerifyConfig& cfg) {
    return detail::timed(1, "quasi-norm axioms", 10.0, [&](json& out, std::string&) {
        bool ok = true;
        std::uint64_t salt = 0;
        for (const auto& [name, dil] : detail::geometry_cases()) {
            StepQuasiNorm q(canonical_ellipsoids(dil));
            std::mt19937_64 rng(cfg.seed + salt++);
            std::uniform_int_distribution<int> scale(-12, 12);
            std::uniform_real_distribution<double> unif(-1.0, 1.0);
            auto draw = [&] {
                Vec u(2);
                do {
                    u << unif(rng), unif(rng);
                } while (u.isZero(0.0));
                return Vec(dil.power(scale(rng)) * u);
            };
            const double bw = q.doubling_constant();
            std::size_t shift_fail = 0, tri_fail = 0;
            double worst = 0.0;
            const int count = 100000;
            for (int i = 0; i < count; ++i) {
                const Vec x = draw(), y = draw();
                if (*q.scale_index(dil.matrix() * x) != *q.scale_index(x) + 1) ++shift_fail;
                const double lhs = q.rho(x + y), rhs = q.rho(x) + q.rho(y);
                worst = std::max(worst, lhs / rhs);
                if (lhs > bw * rhs * (1.0 + 1e-12)) ++tri_fail;
            }
            out[name] = {{"points", count},     {"omega", q.omega()},        {"b_omega", bw},
                         {"shift_failures", shift_fail}, {"triangle_violations", tri_fail}, {"max_ratio", worst}};
            ok = ok && shift_fail == 0 && tri_fail == 0;
        }
        return ok;
    });
}

inline CriterionResult check_euclid_sandwich(const VerifyConfig& cfg) {
    return detail::timed(2, "Euclidean sandwich", 10.0, [&](json& out, std::string&) {
        bool ok = true;
        std::uint64_t salt = 100;
        for (const auto& [name, dil] : detail::geometry_cases()) {
            StepQuasiNorm q(canonical_ellipsoids(dil));
            std::vector<EuclidFit> fits;
            for (int half = 0; half < 2; ++half) {
                std::mt19937_64 rng(cfg.seed + salt++);
                std::vector<Vec> pts;
                for (int k = -20; k < 20; ++k)
                    for (int i = 0; i < 500; ++i) pts.push_back(sample_shell_uniform(q.family(), k, rng));
                fits.push_back(euclid_compare(q, pts));
            }
            const double spread = std::abs(fits[0].c / fits[1].c - 1.0);
            out[name] = {{"c", {fits[0].c, fits[1].c}},
                         {"violations", {fits[0].violations, fits[1].violations}},
                         {"samples_each", fits[0].samples},
                         {"relative_spread", spread}};
            ok = ok && fits[0].violations == 0 && fits[1].violations == 0 && spread <= 0.05;
        }
        return ok;
    });
}

inline CriterionResult check_exponent_algebra(const VerifyConfig&) {
    return detail::timed(3, "exponent algebra", 1.0, [&](json& out, std::string&) {
        const MultiplierBudget b = multiplier_p_range(detail::two_identity(), 4);
        out["budget"] = to_json(b);
        bool ok = b.floorL == 1 && std::abs(b.p_low - 0.71400853844157964) <= 1e-3;
        // Two routes to the same endpoint: floor(L) from the multiplier budget
        // and the largest admissible kernel order R from the R-range.
        double worst = 0.0;
        int cases = 0;
        for (int N = 4; N <= 13; ++N)
            for (int i = 0; i < 10; ++i) {
                const double w = 0.01 + 0.0095 * i;
                Dilation d(2.0 * Mat::Identity(2, 2), Margins{2.0 - w, 2.0 + 1.3 * w});
                const MultiplierBudget mb = multiplier_p_range(d, N);
                const RRange rr = dw_R_range(d, N);
                worst = std::max(worst, std::abs(sio_p_range(d, rr.r_max).lower - mb.p_low));
                ++cases;
            }
        out["sweep_points"] = cases;
        out["max_identity_gap"] = worst;
        return ok && worst <= 1e-12;
    });
}

inline CriterionResult check_classical_limit(const VerifyConfig&) {
    return detail::timed(4, "classical limit", 1.0, [&](json& out, std::string&) {
        bool ok = true;
        json rows = json::array();
        for (int n : {1, 2, 3})
            for (int N = n + 2; N <= 8; ++N) {
                Dilation d(2.0 * Mat::Identity(n, n), Margins{1.9, 2.1});
                double prev = multiplier_p_range(d, N).p_low;
                bool monotone = true;
                for (int step = 0; step < 10; ++step) {
                    d = tighten(d);
                    const double p = multiplier_p_range(d, N).p_low;
                    monotone = monotone && p <= prev + 1e-15;
                    prev = p;
                }
                const double target = static_cast<double>(n) / (N - 1);
                rows.push_back({{"n", n}, {"N", N}, {"p_low", prev}, {"limit", target}, {"monotone", monotone}});
                ok = ok && monotone && std::abs(prev - target) <= 1e-3;
            }
        out["cases"] = rows;
        return ok;
    });
}

inline CriterionResult check_partition_of_unity(const VerifyConfig& cfg) {
    return detail::timed(5, "partition of unity", 5.0, [&](json& out, std::string&) {
        const int J = 8;
        bool ok = true;
        for (const auto& [name, dil] : detail::geometry_cases()) {
            LPPartition part = build_partition(dil);
            const auto& fam = part.family_star();
            const auto& qs = part.quasinorm_star();
            const double b = dil.det_abs();
            // Covered band: xi outside B*_{-J} and inside B*_J.
            const double lo = std::pow(b, -J), hi = std::pow(b, J - 1);
            const double r_lo = fam.inner_radius(-J), r_hi = fam.outer_radius(J);
            const int P = cfg.grid;
            double width = 0.5 * P * r_lo;
            double worst = 0.0;
            std::size_t checked = 0;
            int grids = 0;
            for (;;) {
                Grid g(2, P, P / (4.0 * width));
                ++grids;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const Vec xi = g.point(Domain::Frequency, i);
                    const double r = qs.rho(xi);
                    if (r < lo || r > hi) continue;
                    worst = std::max(worst, std::abs(part.partial_sum(J, xi) - 1.0));
                    ++checked;
                }
                if (width >= r_hi * std::sqrt(2.0)) break;
                width *= 0.25 * P;
            }
            out[name] = {{"grids", grids}, {"points_in_band", checked}, {"max_error", worst}};
            ok = ok && worst < 1e-10 && checked > 0;
        }
        out["J"] = J;
        return ok;
    });
}

inline CriterionResult check_kernel_slices(const VerifyConfig& cfg) {
    return detail::timed(6, "kernel slice support and Plancherel", 30.0, [&](json& out, std::string&) {
        MultiplierCatalog cat(detail::two_identity());
        const auto& part = cat.partition();
        bool ok = true;
        for (const auto& name : detail::selected_symbols(cfg, cat)) {
            double worst_support = 1.0, worst_gap = 0.0;
            for (int j = -8; j <= 8; ++j) {
                KernelSlice s = kernel_piece(cat.get(name), part, j, shell_grid(part, j, cfg.grid));
                worst_support = std::min(worst_support, slice_support_fraction(s, part));
                worst_gap = std::max(worst_gap, slice_plancherel_gap(s));
            }
            out[name] = {{"min_support_fraction", worst_support}, {"max_plancherel_gap", worst_gap}};
            ok = ok && worst_support >= 1.0 - 1e-8 && worst_gap <= 1e-10;
        }
        return ok;
    });
}

inline CriterionResult check_kernel_decay(const VerifyConfig& cfg) {
    return detail::timed(7, "kernel decay consistency", 120.0, [&](json& out, std::string& note) {
        Dilation dil = detail::two_identity();
        MultiplierCatalog cat(dil);
        StepQuasiNorm q(canonical_ellipsoids(dil));
        const int N = 4;
        const RRange rr = dw_R_range(dil, N);
        if (rr.empty) {
            note = "empty kernel order range";
            return false;
        }
        const auto alphas = indices_up_to(2, rr.r_max);
        bool ok = true;
        int tested = 0;
        // By default the two nontrivial invariant symbols; m = 1 only when asked for.
        const auto names = cfg.symbols.empty() ? std::vector<std::string>{"aniso_angular", "aniso_phase"}
                                               : detail::selected_symbols(cfg, cat);
        for (const auto& name : names) {
            const auto& m = cat.get(name);
            if (!m.invariant) continue;
            ++tested;
            DecayReport r = decay_sweep(m, cat.partition(), q, N, alphas, 1, 6, 8, 48);
            PartialSumCheck ps = partial_sum_convergence(m, cat.partition(), q.family(), alphas, 6, 8, 20);
            const bool all = std::all_of(r.alpha_pass.begin(), r.alpha_pass.end(), [](bool v) { return v; });
            out[name] = {{"decay", to_json(r)}, {"partial_sum_change", ps.max_relative_change}, {"probes", ps.probes}};
            ok = ok && all && r.consistent && ps.max_relative_change < 0.01;
        }
        if (tested == 0) note = "no invariant symbol selected";
        return ok && tested > 0;
    });
}

inline CriterionResult check_projection_suite(const VerifyConfig& cfg) {
    return detail::timed(8, "projection suite", 10.0, [&](json& out, std::string&) {
        Dilation dil = detail::two_identity();
        StepQuasiNorm q(canonical_ellipsoids(dil));
        const auto& fam = q.family();
        Grid g(2, 128, 4.0);
        std::mt19937_64 rng(cfg.seed + 8);
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif(-0.3, 0.3);
        double fix_err = 0.0, moment_err = 0.0, worst_ratio = 0.0;
        std::size_t trials = 0, bound_violations = 0;
        json c0s = json::object();
        for (int s : {0, 1, 2}) {
            const double c0_cont = estimate_C0(orthonormal_basis(fam, s), fam);
            for (int j : {-1, 0, 1}) {
                Vec c(2);
                c << unif(rng), unif(rng);
                DiscreteProjector proj(g, fam, j, c, s);
                const double C0 = std::max(c0_cont, proj.C0());
                c0s["s=" + std::to_string(s) + ",j=" + std::to_string(j)] = C0;
                const double diam = fam.outer_radius(j);
                // Each monomial of degree <= s in the scaled variable is fixed.
                for (const auto& a : indices_up_to(2, s)) {
                    SampledField poly(g, Domain::Spatial);
                    for (auto i : proj.points()) poly.values[i] = monomial(Vec((g.point(Domain::Spatial, i) - c) / diam), a);
                    fix_err = std::max(fix_err, (proj.project(poly) - poly).max_abs() / poly.max_abs());
                }
                const int per = (100 + 8) / 9;
                for (int t = 0; t < per && trials < 100; ++t, ++trials) {
                    SampledField f(g, Domain::Spatial);
                    for (auto i : proj.points()) f.values[i] = cplx(gauss(rng), gauss(rng));
                    const SampledField comp = proj.complement(f);
                    const auto mom = discrete_moments(comp, c, s);
                    const auto alphas = indices_up_to(2, s);
                    for (std::size_t k = 0; k < mom.size(); ++k)
                        moment_err = std::max(moment_err, std::abs(mom[k]) / std::pow(diam, alphas[k].order()) / f.lq_norm(1.0));
                    for (double qq : {1.0, 2.0, 4.0}) {
                        const double ratio = comp.lq_norm(qq) / f.lq_norm(qq);
                        worst_ratio = std::max(worst_ratio, ratio / (1.0 + C0));
                        if (ratio > (1.0 + C0) * (1.0 + 1e-12)) ++bound_violations;
                    }
                }
            }
        }
        out["random_functions"] = trials;
        out["max_polynomial_error"] = fix_err;
        out["max_complement_moment"] = moment_err;
        out["max_ratio_over_bound"] = worst_ratio;
        out["bound_violations"] = bound_violations;
        out["C0"] = c0s;
        return trials == 100 && fix_err <= 1e-8 && moment_err <= 1e-8 && bound_violations == 0;
    });
}

inline CriterionResult check_decomposition(const VerifyConfig& cfg) {
    return detail::timed(9, "molecular decomposition", 60.0, [&](json& out, std::string&) {
        Dilation dil = detail::two_identity();
        StepQuasiNorm q(canonical_ellipsoids(dil));
        RhoTable rho(q);
        const auto quad = make_quadruple(dil, make_triple(dil, 0.8, 2.0, 1), min_d(dil, 1, 2.0) + 0.5);
        const double c0 = estimate_C0(orthonormal_basis(q.family(), quad.triple.s), q.family());
        Grid g(2, cfg.grid, 16.0);
        std::mt19937_64 rng(cfg.seed + 9);
        std::uniform_real_distribution<double> unif(-0.5, 0.5);
        bool ok = true;
        json rows = json::array();
        for (int m = 0; m < 20; ++m) {
            Vec c(2);
            c << unif(rng), unif(rng);
            const SampledField M = random_molecule(g, c, quad.triple.s, rng);
            const AtomicDecomposition dec = decompose_molecule(M, c, quad, rho, 8, c0);
            const double err = dec.reconstruction_error_L1.back();
            rows.push_back({{"terms", dec.terms.size()},
                            {"atoms_valid", dec.all_atoms_valid},
                            {"coeff_sum", dec.coeff_sum},
                            {"bound", dec.bound},
                            {"l1_error", err}});
            ok = ok && dec.all_atoms_valid && dec.coeff_sum <= dec.bound && err < 1e-5;
        }
        out["quadruple"] = {{"p", quad.triple.p}, {"q", quad.triple.q}, {"s", quad.triple.s}, {"d", quad.d}};
        out["molecules"] = rows;
        return ok;
    });
}

inline CriterionResult check_atom_norms(const VerifyConfig& cfg) {
    return detail::timed(10, "atom molecular norms", 30.0, [&](json& out, std::string&) {
        Dilation dil = detail::two_identity();
        StepQuasiNorm q(canonical_ellipsoids(dil));
        RhoTable rho(q);
        const auto quad = family_quadruple(dil);
        // One grid for every scale: fine enough for B_{-2}, wide enough for
        // the lattice of B_2 balls.
        const double extent = 1.05 * (q.family().outer_radius(2) * (1.0 + 0.5 * std::sqrt(2.0)));
        const ScaleFamily fam = scale_family(q, quad.triple, 2 * cfg.grid, cfg.seed, extent);
        std::vector<double> per_scale;
        std::size_t invalid = 0, count = 0;
        for (std::size_t s = 0; s < fam.atoms.size(); ++s) {
            double c = 0.0;
            for (const auto& a : fam.atoms[s]) {
                if (!validate_atom(a.field, a.center, a.j, a.triple, q.family()).valid) ++invalid;
                c = std::max(c, molecular_norm(a.field, a.center, quad, rho).value);
                ++count;
            }
            per_scale.push_back(c);
        }
        const double C = *std::max_element(per_scale.begin(), per_scale.end());
        double mean = 0.0;
        for (double c : per_scale) mean += c / per_scale.size();
        double spread = 0.0;
        for (double c : per_scale) spread = std::max(spread, std::abs(c / mean - 1.0));
        out["grid"] = to_json(fam.grids[0]);
        out["atoms"] = count;
        out["invalid_atoms"] = invalid;
        out["C"] = C;
        out["per_scale_max"] = per_scale;
        out["max_deviation_from_mean"] = spread;
        return invalid == 0 && count == 50 && spread <= 0.10;
    });
}

inline CriterionResult check_uniform_bound(const VerifyConfig& cfg) {
    return detail::timed(11, "uniform bound under multipliers", 120.0, [&](json& out, std::string&) {
        Dilation dil = detail::two_identity();
        MultiplierCatalog cat(dil);
        StepQuasiNorm q(canonical_ellipsoids(dil));
        RhoTable rho(q);
        const auto quad = family_quadruple(dil);
        const ScaleFamily fam = scale_family(q, quad.triple, cfg.grid, cfg.seed);
        bool ok = true;
        auto names = detail::selected_symbols(cfg, cat);
        if (std::find(names.begin(), names.end(), "one") == names.end()) names.push_back("one");
        for (const auto& name : names) {
            std::vector<double> ns;
            double moment = 0.0, tail = 0.0, identity_gap = 0.0;
            for (std::size_t s = 0; s < fam.atoms.size(); ++s) {
                const auto rep = uniform_molecule_bound(sample_symbol(cat.get(name), fam.grids[s]), fam.atoms[s], quad, rho);
                for (std::size_t i = 0; i < rep.rows.size(); ++i) {
                    const auto& row = rep.rows[i];
                    ns.push_back(row.N);
                    tail = std::max(tail, row.tail_fraction);
                    if (name == "one") {
                        const auto& a = fam.atoms[s][i];
                        const double n0 = molecular_norm(a.field, a.center, quad, rho).value;
                        identity_gap = std::max(identity_gap, std::abs(row.N - n0) / n0);
                    }
                }
                moment = std::max(moment, rep.max_moment_residual);
            }
            const double mx = *std::max_element(ns.begin(), ns.end()), med = detail::median_of(ns);
            json row = {{"max", mx}, {"median", med}, {"ratio", mx / med}, {"max_moment_residual", moment}, {"max_tail_fraction", tail}};
            bool pass = std::isfinite(mx) && mx < 3.0 * med && moment <= 1e-6;
            if (name == "one") {
                row["identity_gap"] = identity_gap;
                pass = pass && identity_gap <= 1e-12;
            }
            out[name] = row;
            ok = ok && pass;
        }
        return ok;
    });
}

inline CriterionResult check_fourier_decay(const VerifyConfig& cfg) {
    return detail::timed(12, "Fourier decay of atoms", 60.0, [&](json& out, std::string&) {
        Dilation dil = detail::two_identity();
        StepQuasiNorm q(canonical_ellipsoids(dil));
        StepQuasiNorm q_star(canonical_ellipsoids(dil.adjoint()));
        RhoTable rho_star(q_star);
        auto part = std::make_shared<LPPartition>(build_partition(dil));
        const auto quad = family_quadruple(dil);
        const ScaleFamily base = scale_family(q, quad.triple, cfg.grid, cfg.seed);
        const ScaleFamily fine = scale_family(q, quad.triple, 2 * cfg.grid, cfg.seed);
        bool ok = true;
        std::size_t invalid = 0, violations = 0;
        double worst[2] = {0.0, 0.0};
        json scales = json::array();
        for (std::size_t s = 0; s < base.atoms.size(); ++s) {
            // Proxy scales: the frequency shells the coarse grid resolves.
            const Grid& g = base.grids[s];
            Vec lo = Vec::Zero(2), hi = Vec::Zero(2);
            lo(0) = 1.0 / (2.0 * g.extent);
            hi(0) = g.points / (4.0 * g.extent);
            const int k_lo = *part->shell_of(lo), k_hi = *part->shell_of(hi);
            HpProxy proxy(part, k_lo, k_hi, 1.0);
            for (std::size_t i = 0; i < base.atoms[s].size(); ++i) {
                const Atom& a = base.atoms[s][i];
                const Atom& b = fine.atoms[s][i];
                if (!validate_atom(a.field, a.center, a.j, a.triple, q.family()).valid ||
                    !validate_atom(b.field, b.center, b.j, b.triple, q.family()).valid) {
                    ++invalid;
                    continue;
                }
                const SampledField ma = proxy.radial_maximal(a.field), mb = proxy.radial_maximal(b.field);
                int pi = 0;
                for (double p : {0.8, 1.0}) {
                    const FourierDecayFit fa = atom_fourier_decay(a.field, p, ma.lq_norm(p), rho_star);
                    const FourierDecayFit fb = atom_fourier_decay(b.field, p, mb.lq_norm(p), rho_star);
                    violations += fa.violations + fb.violations;
                    worst[pi] = std::max(worst[pi], std::abs(fb.C / fa.C - 1.0));
                    ++pi;
                }
            }
            scales.push_back({{"j", base.scales[s]}, {"proxy_k", {k_lo, k_hi}}});
        }
        out["grids"] = {cfg.grid, 2 * cfg.grid};
        out["scales"] = scales;
        out["invalid_atoms"] = invalid;
        out["violations"] = violations;
        out["max_change_p0.8"] = worst[0];
        out["max_change_p1"] = worst[1];
        ok = invalid == 0 && violations == 0 && worst[0] <= 0.2 && worst[1] <= 0.2;
        return ok;
    });
}

inline std::vector<std::function<CriterionResult(const VerifyConfig&)>> acceptance_checks() {
    return {check_quasinorm_axioms, check_euclid_sandwich,  check_exponent_algebra, check_classical_limit,
            check_partition_of_unity, check_kernel_slices, check_kernel_decay,     check_projection_suite,
            check_decomposition,    check_atom_norms,       check_uniform_bound,    check_fourier_decay};
}

inline std::vector<CriterionResult> run_all(const VerifyConfig& cfg) {
    std::vector<CriterionResult> out;
    for (const auto& check : acceptance_checks()) out.push_back(check(cfg));
    return out;
}

} // namespace aniso
