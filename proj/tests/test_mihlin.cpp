#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aniso/mihlin.hpp"

using namespace aniso;

namespace {

Dilation two_identity() { return Dilation(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1}); }

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Multiplier without_oracle(const Multiplier& m) {
    Multiplier out = m;
    out.derivative = nullptr;
    return out;
}

Multiplier classical_power(double tau) {
    return {"abs_power", [tau](const Vec& xi) { return std::polar(1.0, tau * std::log(xi.norm())); }, {}, false};
}

} // namespace

TEST(AnisoDerivative, ConstantSymbol) {
    MultiplierCatalog cat(two_identity());
    const auto& one = cat.get("one");
    const auto& part = cat.partition();
    Vec xi = v2(0.6, 0.8);
    EXPECT_EQ(aniso_derivative(one, part, 0, zero_index(2), xi), cplx(1.0));
    for (const auto& b : indices_up_to(2, 4))
        if (b.order() > 0) {
            EXPECT_EQ(aniso_derivative(one, part, 0, b, xi), cplx(0.0));
        }
    // Same through finite differences.
    Multiplier fd = without_oracle(one);
    for (const auto& b : indices_up_to(2, 4))
        if (b.order() > 0) {
            EXPECT_NEAR(std::abs(aniso_derivative(fd, part, 3, b, 8.0 * xi)), 0.0, 1e-6);
        }
}

TEST(AnisoDerivative, InvariantSymbolIsShiftInvariant) {
    Dilation d = two_identity();
    MultiplierCatalog cat(d);
    const auto& part = cat.partition();
    auto us = unit_shell_samples(part.family_star(), 50);
    for (const std::string name : {"aniso_phase", "aniso_angular"}) {
        const auto& m = cat.get(name);
        for (const auto& b : indices_up_to(2, 2)) {
            for (int j : {-4, -1, 2, 5}) {
                for (const auto& u : us) {
                    cplx ref = aniso_derivative(m, part, 0, b, u);
                    cplx at = aniso_derivative(m, part, j, b, d.adjoint_power(j) * u);
                    EXPECT_NEAR(std::abs(at - ref), 0.0, 1e-8 * std::max(1.0, std::abs(ref))) << name;
                }
            }
        }
    }
}

TEST(AnisoDerivative, GenericPathAgreesForInvariantSymbol) {
    Dilation d = two_identity();
    MultiplierCatalog cat(d);
    const auto& part = cat.partition();
    Multiplier generic = cat.get("aniso_angular");
    generic.invariant = false;
    for (const auto& u : unit_shell_samples(part.family_star(), 30))
        for (const auto& b : indices_up_to(2, 2))
            for (int j : {-3, 4}) {
                cplx ref = aniso_derivative(cat.get("aniso_angular"), part, 0, b, u);
                cplx at = aniso_derivative(generic, part, j, b, d.adjoint_power(j) * u);
                EXPECT_NEAR(std::abs(at - ref), 0.0, 1e-6 * std::max(1.0, std::abs(ref)));
            }
}

TEST(AnisoDerivative, RieszGradient) {
    MultiplierCatalog cat(two_identity());
    const auto& part = cat.partition();
    const Vec xi = v2(0.6, 0.8);
    const MultiIndex b = unit_index(2, 0);
    // d/dxi_1 (xi_1/|xi|) = xi_2^2 / |xi|^3 = 0.64 at (0.6, 0.8).
    EXPECT_NEAR(aniso_derivative(cat.get("riesz1"), part, 0, b, xi).real(), 0.64, 1e-12);
    EXPECT_NEAR(aniso_derivative(without_oracle(cat.get("riesz1")), part, 0, b, xi).real(), 0.64, 1e-5);
    // Second derivatives fall back to finite differences:
    // d^2/dxi_1^2 (xi_1/|xi|) = -3 xi_1 xi_2^2 / |xi|^5.
    EXPECT_NEAR(aniso_derivative(cat.get("riesz1"), part, 0, unit_index(2, 0, 2), xi).real(), -3 * 0.6 * 0.64, 1e-5);
}

TEST(AnisoDerivative, Errors) {
    MultiplierCatalog cat(two_identity());
    const auto& part = cat.partition();
    try {
        aniso_derivative(cat.get("one"), part, 0, zero_index(2), v2(0.1, 0.1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideShell);
    }
    try {
        aniso_derivative(cat.get("one"), part, 0, unit_index(2, 0, 3), v2(0.6, 0.8), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DerivativeOrderExceeded);
    }
}

TEST(MihlinConstant, ConstantSymbol) {
    MultiplierCatalog cat(two_identity());
    MihlinReport r = mihlin_constant(cat.get("one"), cat.partition(), 4, -3, 3, 1000);
    EXPECT_EQ(r.constant, 1.0);
    for (const auto& c : r.cells) EXPECT_EQ(c.sup, c.beta.order() == 0 ? 1.0 : 0.0);
}

TEST(MihlinConstant, InvariantRowsAgree) {
    MultiplierCatalog cat(two_identity());
    MihlinReport r = mihlin_constant(cat.get("aniso_angular"), cat.partition(), 3, -8, 8, 1000);
    for (const auto& b : indices_up_to(2, 3)) {
        const double ref = r.cell(0, b);
        for (int j = -8; j <= 8; ++j) EXPECT_NEAR(r.cell(j, b), ref, 1e-6 * std::max(1.0, ref));
    }
    EXPECT_TRUE(std::isfinite(r.constant));
}

TEST(MihlinConstant, ClassicalPowerIsStable) {
    MultiplierCatalog cat(two_identity());
    Multiplier m = classical_power(1.0);
    MihlinReport a = mihlin_constant(m, cat.partition(), 2, -4, 4, 1000);
    MihlinReport b = mihlin_constant(m, cat.partition(), 2, -4, 4, 4000);
    EXPECT_TRUE(std::isfinite(a.constant));
    EXPECT_NEAR(a.constant / b.constant, 1.0, 0.10);
}

TEST(MihlinConstant, RhoPowerIndependentOfRange) {
    MultiplierCatalog cat(two_identity());
    const auto& m = cat.get("rho_power");
    MihlinReport a = mihlin_constant(m, cat.partition(), 3, -8, -1, 1000);
    MihlinReport b = mihlin_constant(m, cat.partition(), 3, 1, 8, 1000);
    EXPECT_NEAR(a.constant / b.constant, 1.0, 0.05);
}

TEST(MihlinConstant, NonFiniteSymbol) {
    MultiplierCatalog cat(two_identity());
    Multiplier bad{"bad", [](const Vec& xi) { return cplx(xi(0) > 0 ? std::nan("") : 1.0); }, {}, false};
    try {
        mihlin_constant(bad, cat.partition(), 1, 0, 0, 1000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
}

TEST(MihlinConstant, ZeroOrderRowIsSupOfModulus) {
    MultiplierCatalog cat(two_identity());
    for (const auto& name : cat.names()) {
        MihlinReport r = mihlin_constant(cat.get(name), cat.partition(), 0, -2, 2, 1000);
        for (const auto& c : r.cells) EXPECT_LE(c.sup, 1.0 + 1e-12) << name;
    }
}

TEST(MihlinConstant, DilatedSymbolShiftsRows) {
    Mat a(2, 2);
    a << 2, 1, 0, 3;
    Dilation d(a);
    MultiplierCatalog cat(d);
    const auto& part = cat.partition();
    Multiplier m = classical_power(0.7);
    const int k = 2;
    Multiplier mk = dilate_multiplier(m, d, k);
    MihlinReport base = mihlin_constant(m, part, 2, -3, 5, 1000);
    MihlinReport shifted = mihlin_constant(mk, part, 2, -5, 3, 1000);
    for (int j = -5; j <= 3; ++j)
        for (const auto& b : indices_up_to(2, 2))
            EXPECT_NEAR(shifted.cell(j, b), base.cell(j + k, b), 1e-9 * std::max(1.0, base.cell(j + k, b)));
}

TEST(Catalog, EntriesAreFinite) {
    Mat a(2, 2);
    a << 2, 10, 0, 2;
    MultiplierCatalog cat{Dilation(a)};
    EXPECT_TRUE(cat.has("one"));
    EXPECT_FALSE(cat.has("nope"));
    EXPECT_THROW(cat.get("nope"), Error);
    const auto& fam = cat.partition().family_star();
    std::mt19937_64 rng(3);
    for (const auto& name : cat.names()) {
        const auto& m = cat.get(name);
        for (int i = 0; i < 10000; ++i) {
            Vec xi = sample_shell_uniform(fam, (i % 13) - 6, rng);
            cplx v = m(xi);
            ASSERT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag())) << name;
        }
    }
}

TEST(FiniteDifferences, HalvingStepIsStable) {
    MultiplierCatalog cat(two_identity());
    const auto& part = cat.partition();
    auto us = unit_shell_samples(part.family_star(), 40);
    for (const std::string name : {"aniso_angular", "rho_power", "riesz2"}) {
        const auto& m = cat.get(name);
        for (const auto& b : indices_up_to(2, 4)) {
            if (b.order() == 0) continue;
            const double h = fd_step_factor(b.order()) * part.family_star().inner_radius(0);
            double worst = 0.0, scale = 0.0;
            for (const auto& u : us) {
                cplx a = central_difference(m.eval, u, b, h);
                cplx c = central_difference(m.eval, u, b, 0.5 * h);
                worst = std::max(worst, std::abs(a - c));
                scale = std::max(scale, std::abs(c));
            }
            EXPECT_LT(worst, 0.05 * scale + 1e-9) << name << " order " << b.order();
        }
    }
}
