#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aniso/field.hpp"
#include "aniso/partition.hpp"

using namespace aniso;

namespace {

constexpr double kPiD = std::numbers::pi;

SampledField gaussian(const Grid& g, double width = 1.0, Vec shift = Vec()) {
    if (shift.size() == 0) shift = Vec::Zero(g.n);
    return SampledField::from_function(g, Domain::Spatial,
                                       [&](const Vec& x) { return cplx(std::exp(-kPiD * (x - shift).squaredNorm() / (width * width))); });
}

SampledField random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    SampledField f(g, Domain::Spatial);
    for (auto& v : f.values) v = cplx(n(rng), n(rng));
    return f;
}

} // namespace

TEST(Grid, Geometry) {
    Grid g(2, 256, 8.0);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(g.freq_spacing(), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(g.origin(Domain::Frequency), -8.0);
    EXPECT_EQ(g.size(), 65536u);
    EXPECT_THROW(Grid(2, 100, 8.0), Error);
    EXPECT_THROW(Grid(4, 64, 8.0), Error);
    for (std::size_t i : {0u, 17u, 65535u}) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
}

TEST(Dft, GaussianIsFixedPoint) {
    Grid g(2, 256, 8.0);
    SampledField f = gaussian(g);
    SampledField fh = dft(f);
    double err = 0.0;
    for (std::size_t k = 0; k < fh.values.size(); ++k)
        err = std::max(err, std::abs(fh.values[k] - std::exp(-kPiD * fh.point(k).squaredNorm())));
    EXPECT_LT(err, 1e-8);
}

TEST(Dft, ImpulseGivesConstant) {
    Grid g(2, 64, 4.0);
    SampledField f(g, Domain::Spatial);
    f.values[g.flatten({32, 32, 0})] = 1.0 / g.cell(Domain::Spatial);
    SampledField fh = dft(f);
    for (const auto& v : fh.values) EXPECT_NEAR(std::abs(v - cplx(1.0)), 0.0, 1e-12);
}

TEST(Dft, ShiftTheorem) {
    Grid g(2, 256, 8.0);
    Vec a(2);
    a << 0.7, -1.3;
    SampledField fh = dft(gaussian(g));
    SampledField sh = dft(gaussian(g, 1.0, a));
    double err = 0.0;
    for (std::size_t k = 0; k < fh.values.size(); ++k) {
        cplx expect = std::polar(1.0, -2.0 * kPiD * a.dot(fh.point(k))) * fh.values[k];
        err = std::max(err, std::abs(sh.values[k] - expect));
    }
    EXPECT_LT(err, 1e-8);
}

TEST(Dft, PlancherelAndRoundTrip) {
    for (int n : {1, 2}) {
        Grid g(n, n == 1 ? 1024 : 128, 5.0);
        SampledField f = random_field(g, 7);
        SampledField fh = dft(f);
        EXPECT_NEAR(fh.l2_norm() / f.l2_norm(), 1.0, 1e-10);
        EXPECT_LT(relative_l2(idft(fh), f), 1e-10);
    }
}

TEST(Dft, TagMismatch) {
    Grid g(2, 32, 2.0);
    SampledField f(g, Domain::Spatial);
    EXPECT_THROW(idft(f), Error);
    EXPECT_THROW(dft(dft(f)), Error);
    SampledField h(Grid(2, 64, 2.0), Domain::Spatial);
    EXPECT_THROW(f + h, Error);
}

TEST(Dft, Linearity) {
    Grid g(2, 64, 4.0);
    SampledField a = random_field(g, 1), b = random_field(g, 2);
    SampledField lhs = dft(a * cplx(2.0, -1.0) + b);
    SampledField rhs = dft(a) * cplx(2.0, -1.0) + dft(b);
    EXPECT_LT(relative_l2(lhs, rhs), 1e-13);
}

TEST(DilateField, IdentityAndMass) {
    Grid g(2, 256, 8.0);
    Mat m(2, 2);
    m << 2, 1, 0, 2;
    Dilation d(m);
    SampledField f = gaussian(g, 0.8);
    EXPECT_EQ(relative_l2(dilate_field(f, d, 0, Normalization::L1), f), 0.0);
    for (int k : {1, 2, -1}) {
        SampledField fk = dilate_field(f, d, k, Normalization::L1);
        EXPECT_NEAR(std::abs(fk.integral() / f.integral()), 1.0, 1e-6) << "k = " << k;
    }
}

TEST(DilateField, RoundTripAgainstClosedForm) {
    Grid g(2, 512, 8.0);
    Dilation d(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1});
    SampledField f = gaussian(g, 2.0);
    SampledField up = dilate_field(f, d, 1, Normalization::Linf);
    // f(2x) is the Gaussian of width 1.
    EXPECT_LT(relative_l2(up, gaussian(g, 1.0)), 1e-3);
    EXPECT_LT(relative_l2(dilate_field(up, d, -1, Normalization::Linf), f), 1e-3);
}

TEST(DilateField, SupportLeavingBox) {
    Grid g(2, 128, 4.0);
    Dilation d(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1});
    try {
        dilate_field(gaussian(g, 1.5), d, -2, Normalization::L1);
        FAIL() << "expected ScaleOutOfRange";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ScaleOutOfRange);
    }
}

TEST(SpectralDerivative, ZeroOrderIsIdentity) {
    Grid g(2, 64, 4.0);
    SampledField f = gaussian(g);
    EXPECT_EQ(relative_l2(spectral_derivative(f, zero_index(2)), f), 0.0);
    EXPECT_THROW(spectral_derivative(f, unit_index(2, 0, 7)), Error);
}

TEST(SpectralDerivative, WindowedPlaneWave) {
    Grid g(2, 512, 8.0);
    Vec xi0(2);
    xi0 << 1.25, -0.5;
    // Flat top on |x_i| <= 2, smooth fall-off to zero by |x_i| = 6.
    auto window = [](double t) { return smooth_step((std::abs(t) - 2.0) / 4.0); };
    SampledField f = SampledField::from_function(g, Domain::Spatial, [&](const Vec& x) {
        return std::polar(window(x(0)) * window(x(1)), 2.0 * kPiD * xi0.dot(x));
    });
    const std::array<cplx, 3> z{cplx(0, 2 * kPiD * xi0(0)), cplx(0, 2 * kPiD * xi0(1)), 0.0};
    for (const MultiIndex& beta : indices_up_to(2, 3)) {
        SampledField d = spectral_derivative(f, beta);
        const cplx factor = monomial(z, beta);
        double err = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            if (f.point(i).cwiseAbs().maxCoeff() > 1.5) continue;
            err = std::max(err, std::abs(d.values[i] - factor * f.values[i]));
        }
        EXPECT_LT(err, 1e-6 * std::abs(factor)) << "order " << beta.order();
    }
}

TEST(SpectralDerivative, MatchesCentralDifferences) {
    // Sixth-order central differences at h = grid spacing.
    Grid g(1, 512, 8.0);
    SampledField f = gaussian(g);
    SampledField d = spectral_derivative(f, unit_index(1, 0));
    const double h = g.spacing();
    const double w[4] = {0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    double err = 0.0;
    for (int i = 3; i < g.points - 3; ++i) {
        cplx fd = 0.0;
        for (int k = 1; k <= 3; ++k) fd += w[k] * (f.values[i + k] - f.values[i - k]);
        fd /= h;
        err = std::max(err, std::abs(fd - d.values[i]));
    }
    EXPECT_LT(err, 1e-5);
}

TEST(SpectralDerivative, CommutesWithDft) {
    Grid g(2, 64, 4.0);
    SampledField f = gaussian(g, 1.3);
    MultiIndex beta(2, {1, 2, 0});
    SampledField lhs = dft(spectral_derivative(f, beta));
    SampledField rhs = dft(f);
    for (std::size_t k = 0; k < rhs.values.size(); ++k) {
        Vec xi = rhs.point(k);
        rhs.values[k] *= cplx(0, 2 * kPiD * xi(0)) * std::pow(cplx(0, 2 * kPiD * xi(1)), 2);
    }
    EXPECT_LT((lhs - rhs).max_abs(), 1e-10 * rhs.max_abs());
}
