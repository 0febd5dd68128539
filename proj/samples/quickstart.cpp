// Build a dilation, read off the admissible exponents, then push one atom
// through an anisotropic multiplier and measure the result.
#include <cstdio>
#include <random>

#include "aniso/aniso.hpp"

using namespace aniso;

int main() {
    Mat a(2, 2);
    a << 2, 1, 0, 3;
    Dilation dil(a, Margins{1.9, 3.1});
    StepQuasiNorm q(canonical_ellipsoids(dil));

    Vec x(2);
    x << 0.7, -1.2;
    std::printf("rho(%g, %g) = %g\n", x[0], x[1], q.rho(x));

    for (int N = 4; N <= 8; ++N) {
        try {
            const MultiplierBudget budget = multiplier_p_range(dil, N);
            std::printf("N = %d: floor(L) = %d, p in (%.6f, 1]\n", N, budget.floorL, budget.p_low);
        } catch (const Error& e) {
            std::printf("N = %d: %s\n", N, e.what());
        }
    }

    // The atom and multiplier live on 2I with tight margins, where the
    // exponent range is widest.
    Dilation iso(2.0 * Mat::Identity(2, 2), Margins{1.9, 2.1});
    StepQuasiNorm qi(canonical_ellipsoids(iso));
    RhoTable rho(qi);
    const AdmissibleQuadruple quad = make_quadruple(iso, make_triple(iso, 0.8, 2.0, 0), 0.8);

    Grid g(2, 128, 8.0);
    std::mt19937_64 rng(1);
    Atom atom = random_atom(g, qi.family(), 0, Vec::Zero(2), quad.triple, rng);

    MultiplierCatalog cat(iso);
    UniformBoundReport rep = uniform_molecule_bound(sample_symbol(cat.get("riesz1"), g), {atom}, quad, rho);
    std::printf("molecular norm of T a: %.4f (moment residual %.1e)\n", rep.max_over_atoms, rep.max_moment_residual);
    return 0;
}
