#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aniso/operator.hpp"

using namespace aniso;

namespace {

Dilation two_identity() { return Dilation(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1}); }

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

SampledField gaussian(const Grid& g, double width, const Vec& c) {
    return SampledField::from_function(
        g, Domain::Spatial, [&](const Vec& x) { return cplx(std::exp(-std::numbers::pi * (x - c).squaredNorm() / (width * width))); });
}

SampledField random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    SampledField f(g, Domain::Spatial);
    for (auto& v : f.values) v = cplx(n(rng), n(rng));
    return f;
}

/// Cyclic shift by (s0, s1) grid cells.
SampledField roll(const SampledField& f, int s0, int s1) {
    SampledField out(f.grid, f.domain);
    const int P = f.grid.points;
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j)
            out.values[f.grid.flatten({(i + s0 + P) % P, (j + s1 + P) % P, 0})] = f.values[f.grid.flatten({i, j, 0})];
    return out;
}

struct Lab {
    Dilation dil = two_identity();
    MultiplierCatalog cat{dil};
    StepQuasiNorm q{canonical_ellipsoids(dil)};
    StepQuasiNorm q_star{canonical_ellipsoids(dil.adjoint())};
    RhoTable rho{q};
    RhoTable rho_star{q_star};
    std::shared_ptr<const LPPartition> part = std::make_shared<LPPartition>(build_partition(dil));

    AdmissibleQuadruple quad() const { return make_quadruple(dil, make_triple(dil, 0.8, 2.0, 0), 0.8); }
};

} // namespace

TEST(ApplyMultiplier, IdentitySymbol) {
    Lab lab;
    Grid g(2, 128, 4.0);
    SampledField f = random_field(g, 1);
    EXPECT_LT(relative_l2(apply_multiplier(lab.cat.get("one"), f), f), 1e-10);
}

TEST(ApplyMultiplier, CompositionIsProduct) {
    Lab lab;
    Grid g(2, 128, 4.0);
    SampledField f = gaussian(g, 0.7, v2(0.3, -0.1));
    const auto& m1 = lab.cat.get("riesz1");
    const auto& m2 = lab.cat.get("aniso_angular");
    Multiplier both{"product", [&](const Vec& xi) { return m1(xi) * m2(xi); }, {}, false};
    SampledField twice = apply_multiplier(m2, apply_multiplier(m1, f));
    EXPECT_LT(relative_l2(twice, apply_multiplier(both, f)), 1e-10);
}

TEST(ApplyMultiplier, UnimodularSymbolsPreserveL2) {
    Lab lab;
    Grid g(2, 256, 8.0);
    SampledField f = gaussian(g, 1.0, v2(0.0, 0.5));
    for (const std::string name : {"rho_power", "aniso_phase", "one"})
        EXPECT_NEAR(apply_multiplier(lab.cat.get(name), f).l2_norm() / f.l2_norm(), 1.0, 1e-8) << name;
}

TEST(ApplyMultiplier, LinearAndTranslationInvariant) {
    Lab lab;
    Grid g(2, 64, 4.0);
    const auto& m = lab.cat.get("rho_power");
    SampledField a = random_field(g, 2), b = random_field(g, 3);
    const cplx c(0.5, -2.0);
    SampledField lhs = apply_multiplier(m, a * c + b);
    SampledField rhs = apply_multiplier(m, a) * c + apply_multiplier(m, b);
    EXPECT_LT(relative_l2(lhs, rhs), 1e-12);
    EXPECT_LT(relative_l2(apply_multiplier(m, roll(a, 5, -3)), roll(apply_multiplier(m, a), 5, -3)), 1e-12);
}

TEST(ApplyMultiplier, OriginValueAndErrors) {
    Lab lab;
    Grid g(2, 64, 4.0);
    SampledField s = sample_symbol(lab.cat.get("riesz1"), g);
    // The origin takes the value on the e_1 ray.
    EXPECT_NEAR(std::abs(s.values[g.flatten({32, 32, 0})] - cplx(1.0)), 0.0, 1e-15);
    EXPECT_THROW(apply_sampled(s, SampledField(Grid(2, 32, 4.0), Domain::Spatial)), Error);
    EXPECT_THROW(apply_sampled(random_field(g, 1), random_field(g, 2)), Error);
}

TEST(HpProxy, BasicProperties) {
    Lab lab;
    Grid g(2, 128, 8.0);
    HpProxy proxy(lab.part, -3, 3, 0.8);
    EXPECT_EQ(proxy.norm(SampledField(g, Domain::Spatial)), 0.0);
    SampledField f = gaussian(g, 0.6, v2(0.2, 0.0)) - gaussian(g, 0.9, v2(-0.3, 0.1));
    const double base = proxy.norm(f);
    EXPECT_GT(base, 0.0);
    EXPECT_NEAR(proxy.norm(f * cplx(-3.0, 4.0)), 5.0 * base, 1e-12 * base);
    EXPECT_THROW(HpProxy(lab.part, 2, 1, 0.8), Error);
    EXPECT_THROW(HpProxy(lab.part, 0, 1, 0.0), Error);
    EXPECT_THROW(proxy.norm(dft(f)), Error);
    EXPECT_EQ(proxy.with_p(1.0).p(), 1.0);
    EXPECT_EQ(proxy.with_range(-5, 6).k_hi(), 6);
}

TEST(HpProxy, MonotoneInRange) {
    Lab lab;
    Grid g(2, 128, 8.0);
    SampledField f = gaussian(g, 0.5, v2(0.0, 0.0));
    HpProxy single(lab.part, 0, 0, 1.0);
    HpProxy wide = single.with_range(-4, 4);
    SampledField m0 = single.radial_maximal(f);
    SampledField mw = wide.radial_maximal(f);
    for (std::size_t i = 0; i < f.values.size(); ++i) ASSERT_GE(mw.values[i].real(), m0.values[i].real());
    // f >= 0 and phi_0 has unit mass, so the value at the center is positive.
    EXPECT_GT(m0.values[g.flatten({64, 64, 0})].real(), 0.0);
    EXPECT_GE(wide.norm(f), single.norm(f));
}

TEST(HpProxy, ScaleTruncationConverges) {
    Lab lab;
    Grid g(2, 256, 16.0);
    SampledField f = gaussian(g, 0.6, v2(0.2, 0.0)) - gaussian(g, 0.9, v2(-0.3, 0.1)) * cplx(std::pow(0.6 / 0.9, 2));
    HpProxy proxy(lab.part, -4, 4, 0.8);
    const double a = proxy.norm(f), b = proxy.with_range(-8, 8).norm(f);
    EXPECT_NEAR(b / a, 1.0, 0.02);
}

TEST(HpProxy, AtomStableUnderRefinement) {
    Lab lab;
    AdmissibleTriple t = make_triple(lab.dil, 0.8, 2.0, 0);
    auto proxy_at = [&](int points) {
        Grid g(2, points, 8.0);
        std::mt19937_64 rng(4);
        Atom a = random_atom(g, lab.q.family(), 0, Vec::Zero(2), t, rng);
        return HpProxy(lab.part, -4, 4, 0.8).norm(a.field);
    };
    EXPECT_NEAR(proxy_at(128) / proxy_at(256), 1.0, 0.05);
}

TEST(FourierDecay, AtomBasics) {
    Lab lab;
    Grid g(2, 256, 8.0);
    std::mt19937_64 rng(6);
    AdmissibleTriple t = make_triple(lab.dil, 0.8, 2.0, 0);
    Atom a = random_atom(g, lab.q.family(), 0, v2(0.4, 0.1), t, rng);
    HpProxy proxy(lab.part, -4, 4, 0.8);
    FourierDecayFit fit = atom_fourier_decay(a.field, 0.8, proxy, lab.rho_star);
    EXPECT_LT(std::abs(fit.at_origin), 1e-12 * a.field.lq_norm(1.0));
    EXPECT_EQ(fit.violations, 0u);
    EXPECT_GT(fit.C, 0.0);
    // p = 1: the bound is |ahat| <= C proxy.
    HpProxy p1 = proxy.with_p(1.0);
    FourierDecayFit one = atom_fourier_decay(a.field, 1.0, p1, lab.rho_star);
    EXPECT_NEAR(one.C * one.proxy, dft(a.field).max_abs(), 1e-12 * one.C * one.proxy);
    EXPECT_LE(one.C, a.field.lq_norm(1.0) / one.proxy * (1.0 + 1e-9));
}

TEST(UniformBound, IdentityReproducesAtomNorms) {
    Lab lab;
    Grid g(2, 128, 8.0);
    const auto quad = lab.quad();
    std::mt19937_64 rng(10);
    std::vector<Atom> atoms;
    for (int j = -1; j <= 1; ++j) atoms.push_back(random_atom(g, lab.q.family(), j, v2(0.25 * j, 0.0), quad.triple, rng));
    UniformBoundReport rep = uniform_molecule_bound(sample_symbol(lab.cat.get("one"), g), atoms, quad, lab.rho);
    ASSERT_EQ(rep.rows.size(), atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double n = molecular_norm(atoms[i].field, atoms[i].center, quad, lab.rho).value;
        EXPECT_NEAR(rep.rows[i].N, n, 1e-10 * n);
        EXPECT_EQ(rep.rows[i].id, i);
        EXPECT_EQ(rep.rows[i].j, atoms[i].j);
    }
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.max_moment_residual, 1e-10);
}

TEST(UniformBound, HomogeneousInTheAtoms) {
    Lab lab;
    Grid g(2, 128, 8.0);
    const auto quad = lab.quad();
    std::mt19937_64 rng(11);
    std::vector<Atom> atoms, scaled;
    for (int j : {-1, 0, 1}) atoms.push_back(random_atom(g, lab.q.family(), j, Vec::Zero(2), quad.triple, rng));
    for (auto a : atoms) {
        a.field *= cplx(0.0, 3.0);
        scaled.push_back(std::move(a));
    }
    SampledField symbol = sample_symbol(lab.cat.get("rho_power"), g);
    UniformBoundReport r1 = uniform_molecule_bound(symbol, atoms, quad, lab.rho);
    UniformBoundReport r3 = uniform_molecule_bound(symbol, scaled, quad, lab.rho);
    for (std::size_t i = 0; i < atoms.size(); ++i) EXPECT_NEAR(r3.rows[i].N, 3.0 * r1.rows[i].N, 1e-10 * r3.rows[i].N);
    // T preserves the vanishing mean up to the grid treatment of the origin.
    EXPECT_LT(r1.max_moment_residual, 1e-6);
}

TEST(FarField, ProfileIsFinite) {
    Lab lab;
    Grid g(2, 256, 16.0);
    const auto quad = lab.quad();
    std::mt19937_64 rng(2);
    Atom a = random_atom(g, lab.q.family(), -1, Vec::Zero(2), quad.triple, rng);
    SampledField ta = apply_multiplier(lab.cat.get("aniso_angular"), a.field);
    auto prof = far_field_profile(ta, a, lab.q, 1, 4);
    ASSERT_EQ(prof.size(), 4u);
    for (double v : prof) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GT(v, 0.0);
    }
}
