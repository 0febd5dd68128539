#include <gtest/gtest.h>

#include <cmath>

#include "aniso/exponents.hpp"

using namespace aniso;

namespace {

Dilation two_identity(double lo = 1.9, double hi = 2.1) { return Dilation(2.0 * Mat::Identity(2, 2), Margins{lo, hi}); }

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Unsupported;
}

} // namespace

TEST(MinS, Examples) {
    Dilation d = two_identity();
    EXPECT_EQ(min_s(d, 1.0), 0);
    EXPECT_EQ(min_s(d, 0.5), 2);
    EXPECT_EQ(code_of([&] { min_s(d, 0.0); }), ErrorCode::BadP);
    EXPECT_EQ(code_of([&] { min_s(d, 1.5); }), ErrorCode::BadP);
    int prev = 0;
    for (double p = 1.0; p > 0.02; p -= 0.01) {
        int s = min_s(d, p);
        EXPECT_GE(s, prev);
        prev = s;
    }
}

TEST(MinD, Examples) {
    Dilation d = two_identity();
    EXPECT_DOUBLE_EQ(min_d(d, 0, kInf), 1.0);
    EXPECT_NEAR(min_d(d, 2, 2.0), 1.5703893278913979, 1e-14);
    for (int s = 0; s < 6; ++s) EXPECT_LT(min_d(d, s, 2.0), min_d(d, s + 1, 2.0));
}

TEST(Quadruple, ThetaAndDefaults) {
    Dilation d = two_identity();
    AdmissibleTriple t = make_triple(d, 0.8, 2.0, 1);
    AdmissibleQuadruple q = make_quadruple(d, t);
    EXPECT_NEAR(q.d, min_d(d, 1, 2.0) + 0.5, 1e-15);
    EXPECT_NEAR(q.theta, (1.25 - 0.5) / q.d, 1e-15);
    EXPECT_THROW(make_quadruple(d, t, min_d(d, 1, 2.0)), Error);
    EXPECT_THROW(make_triple(d, 0.5, 2.0, 1), Error);
    EXPECT_THROW(make_triple(d, 0.8, 0.5, 0), Error);
}

TEST(CzrLower, Examples) {
    Dilation d = two_identity();
    EXPECT_DOUBLE_EQ(czr_lower(d, 1.0, 0), 0.0);
    EXPECT_NEAR(czr_lower(d, 2.0 / 3.0, 1), 1.1559287257008229, 1e-14);
    EXPECT_LE(czr_lower(d, 0.7, 0), czr_lower(d, 0.7, 1));
    EXPECT_GE(czr_lower(d, 0.5, 0), czr_lower(d, 0.7, 0));
}

TEST(RRange, Examples) {
    Dilation d = two_identity();
    RRange r = dw_R_range(d, 4);
    EXPECT_NEAR(r.bound, 1.5919419503010784, 1e-14);
    EXPECT_FALSE(r.empty);
    EXPECT_EQ(r.r_max, 1);
    EXPECT_TRUE(dw_R_range(d, 2).empty);
    for (int n = 1; n < 12; ++n) EXPECT_LT(dw_bound(d, n), dw_bound(d, n + 1));
}

TEST(RRange, IntegerBoundExcludesItself) {
    // L = 1 exactly for 2 I_1 with margins (5^{1/3}, 2.5) and N = 3.
    Dilation d(2.0 * Mat::Identity(1, 1), Margins{std::cbrt(5.0), 2.5});
    EXPECT_NEAR(dw_bound(d, 3), 1.0, 1e-12);
    EXPECT_EQ(dw_R_range(d, 3).r_max, 0);
}

TEST(MultiplierRange, TwoIdentityOrderFour) {
    MultiplierBudget b = multiplier_p_range(two_identity(), 4);
    EXPECT_EQ(b.floorL, 1);
    EXPECT_FALSE(b.tightened);
    EXPECT_NEAR(range_coefficient(two_identity()), 0.40054347554811525, 1e-15);
    EXPECT_NEAR(b.p_low, 0.71400853844157964, 1e-14);
}

TEST(MultiplierRange, OrderOneIsEmpty) {
    EXPECT_EQ(code_of([] { multiplier_p_range(two_identity(), 1); }), ErrorCode::EmptyRange);
}

TEST(MultiplierRange, IntegerLTightens) {
    Dilation d(2.0 * Mat::Identity(1, 1), Margins{std::cbrt(5.0), 2.5});
    MultiplierBudget b = multiplier_p_range(d, 3);
    EXPECT_TRUE(b.tightened);
    EXPECT_EQ(b.floorL, 1);
    EXPECT_GT(b.L_tightened, 1.0);
    EXPECT_LT(b.L_tightened, 2.0);
    EXPECT_NEAR(b.p_low, 1.0 / (1.0 + range_coefficient(d)), 1e-15);
}

TEST(MultiplierRange, ClassicalLimit) {
    // With strict margins around 2 the floor of L is N - n - 1 and the lower
    // endpoint tends to n / (N - 1).
    for (int n : {1, 2, 3}) {
        for (int N = n + 2; N <= 8; ++N) {
            Dilation d(2.0 * Mat::Identity(n, n), Margins{1.9, 2.1});
            double prev = multiplier_p_range(d, N).p_low;
            for (int step = 0; step < 10; ++step) {
                d = tighten(d);
                MultiplierBudget b = multiplier_p_range(d, N);
                EXPECT_EQ(b.floorL, N - n - 1);
                EXPECT_LT(b.p_low, prev + 1e-15);
                prev = b.p_low;
            }
            EXPECT_NEAR(prev, static_cast<double>(n) / (N - 1), 1e-3);
        }
    }
}

TEST(SioRange, Examples) {
    Dilation d = two_identity();
    Interval one = sio_p_range(d, 1);
    EXPECT_NEAR(one.lower, 0.71400853844157964, 1e-14);
    EXPECT_DOUBLE_EQ(one.upper, 1.0);
    EXPECT_TRUE(one.lower_open);
    Interval two = sio_p_range(d, 2);
    EXPECT_NEAR(1.0 / two.lower - 1.0, 2.0 * (1.0 / one.lower - 1.0), 1e-14);
    EXPECT_GT(two.lower, 0.0);
    EXPECT_THROW(sio_p_range(d, 0), Error);
}

TEST(SioRange, AgreesWithMultiplierRange) {
    for (int N = 4; N <= 13; ++N) {
        for (int i = 0; i < 10; ++i) {
            const double w = 0.01 + 0.0095 * i;
            Dilation d = two_identity(2.0 - w, 2.0 + 1.3 * w);
            MultiplierBudget b = multiplier_p_range(d, N);
            EXPECT_NEAR(sio_p_range(d, b.floorL).lower, b.p_low, 1e-12);
        }
    }
}

TEST(Exponents, AdjointInvariance) {
    Mat a(2, 2);
    a << 2, 10, 0, 2;
    Dilation d(a, Margins{1.5, 2.2});
    Dilation s = d.adjoint();
    EXPECT_EQ(min_s(d, 0.6), min_s(s, 0.6));
    EXPECT_DOUBLE_EQ(min_d(d, 2, 3.0), min_d(s, 2, 3.0));
    EXPECT_DOUBLE_EQ(dw_bound(d, 5), dw_bound(s, 5));
}
