#include <gtest/gtest.h>

#include <cmath>

#include "splinegale/bspline.hpp"
#include "splinegale/random.hpp"
#include "test_util.hpp"

using namespace splinegale;

namespace {

Spline random_spline(Rng& rng, const BSplineBasis& b) {
    std::vector<double> c(b.dim());
    for (double& v : c) v = rng.normal();
    return {b, c};
}

}  // namespace

TEST(BuildBasis, Dimensions) {
    EXPECT_EQ(build_basis(Partition(), 3).dim(), 3u);
    EXPECT_EQ(build_basis(Partition({0, .5, 1}), 1).dim(), 2u);
    const auto hats = build_basis(Partition({0, .5, 1}), 2);
    ASSERT_EQ(hats.dim(), 3u);
    EXPECT_EQ(hats.support(0).lo, 0.0);
    EXPECT_EQ(hats.support(0).hi, 0.5);
    EXPECT_EQ(hats.support(1).lo, 0.0);
    EXPECT_EQ(hats.support(1).hi, 1.0);
    EXPECT_EQ(hats.support(2).lo, 0.5);
    EXPECT_EQ(hats.support(2).hi, 1.0);
}

TEST(Eval, Examples) {
    const auto b1 = build_basis(Partition({0, .5, 1}), 1);
    const auto nz = b1.eval_nonzero(0.25);
    EXPECT_EQ(nz.first, 0u);
    ASSERT_EQ(nz.values.size(), 1u);
    EXPECT_EQ(nz.values[0], 1.0);

    const auto b2 = build_basis(Partition({0, .5, 1}), 2);
    const auto h = b2.eval_nonzero(0.25);
    EXPECT_EQ(h.first, 0u);
    EXPECT_NEAR(h.values[0], 0.5, 1e-15);
    EXPECT_NEAR(h.values[1], 0.5, 1e-15);
}

TEST(Eval, MatchesRecursiveDefinition) {
    Rng rng(41);
    for (int k = 1; k <= 6; ++k)
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = oracle::random_partition(rng, 1 + rng.index(8));
            const BSplineBasis b(p, k);
            const auto t = oracle::knots(p, k);
            for (int s = 0; s <= 200; ++s) {
                const double x = s / 200.0;
                for (std::size_t i = 0; i < b.dim(); ++i)
                    ASSERT_NEAR(b.eval(i, x), oracle::bspline(t, i, k, x), 1e-12) << "k=" << k << " x=" << x;
            }
        }
}

TEST(Eval, PartitionOfUnity) {
    Rng rng(43);
    for (int k = 1; k <= 6; ++k)
        for (int trial = 0; trial < 10; ++trial) {
            const BSplineBasis b(oracle::random_partition(rng, 1 + rng.index(12)), k);
            for (int s = 0; s < 1000; ++s) {
                const auto nz = b.eval_nonzero(s / 999.0);
                double sum = 0.0;
                for (double v : nz.values) {
                    sum += v;
                    ASSERT_GE(v, -1e-15);
                }
                ASSERT_NEAR(sum, 1.0, 1e-12);
            }
        }
}

TEST(Eval, MeasuredSupportMatchesKnots) {
    Rng rng(47);
    for (int k = 1; k <= 6; ++k) {
        const BSplineBasis b(oracle::random_partition(rng, 6), k);
        for (std::size_t i = 0; i < b.dim(); ++i) {
            const Interval e = b.support(i);
            for (const auto& atom : atoms(b.partition()))
                for (double t : {0.01, 0.3, 0.5, 0.7, 0.99}) {
                    const double x = atom.lo + t * atom.length();
                    const double v = std::abs(b.eval(i, x));
                    if (e.contains(atom)) ASSERT_GT(v, 1e-14) << i << " " << x;
                    else ASSERT_EQ(v, 0.0) << i << " " << x;
                }
        }
    }
}

TEST(GammaK, Examples) {
    EXPECT_EQ(gamma_k(Partition({0, .5, 1}), 1), 1.0);
    EXPECT_NEAR(gamma_k(Partition({0, .25, 1}), 1), 3.0, 1e-15);
    std::vector<double> uniform;
    for (int i = 0; i <= 8; ++i) uniform.push_back(i / 8.0);
    EXPECT_NEAR(gamma_k(Partition(uniform), 2), 2.0, 1e-14);
}

TEST(Gram, Examples) {
    const auto g1 = gram(build_basis(Partition({0, .5, 1}), 1)).dense();
    EXPECT_NEAR(g1(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(g1(1, 1), 0.5, 1e-15);
    EXPECT_EQ(g1(0, 1), 0.0);

    const auto g2 = gram(build_basis(Partition({0, .5, 1}), 2)).dense();
    // Hat integrals: int N_i N_j on atoms of length h is h/3 on the diagonal, h/6 off it.
    EXPECT_NEAR(g2(0, 0), 0.5 / 3.0, 1e-15);
    EXPECT_NEAR(g2(0, 1), 0.5 / 6.0, 1e-15);
    EXPECT_NEAR(g2(1, 1), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(g2(0, 2), 0.0);
    const double rows[] = {0.25, 0.5, 0.25};
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g2(i, 0) + g2(i, 1) + g2(i, 2), rows[i], 1e-15);
}

TEST(Gram, RowSumsAreSupportLengthsOverK) {
    Rng rng(53);
    for (int k = 1; k <= 6; ++k) {
        const BSplineBasis b(oracle::random_partition(rng, 7), k);
        const auto g = gram(b).dense();
        for (std::size_t i = 0; i < b.dim(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < b.dim(); ++j) row += g(i, j);
            EXPECT_NEAR(row, b.support(i).length() / k, 1e-14);
        }
        const auto t = oracle::knots(b.partition(), k);
        const std::size_t i = b.dim() / 2, j = std::min(i + 1, b.dim() - 1);
        const double ref = oracle::simpson(
            [&](double x) { return oracle::bspline(t, i, k, x) * oracle::bspline(t, j, k, x); }, 0, 1, 40000);
        EXPECT_NEAR(g(i, j), ref, 1e-6);
    }
}

TEST(ToPiecewise, Examples) {
    const auto b = build_basis(Partition({0, .3, .6, 1}), 3);
    const Spline ones(b, std::vector<double>(b.dim(), 1.0));
    const auto f = to_piecewise(ones);
    for (int s = 0; s <= 50; ++s) EXPECT_NEAR(f(s / 50.0), 1.0, 1e-14);

    const Spline step(build_basis(Partition({0, .5, 1}), 1), {2.0, -1.0});
    EXPECT_EQ(to_piecewise(step)(0.2), 2.0);
    EXPECT_EQ(to_piecewise(step)(0.7), -1.0);

    const Spline tent(build_basis(Partition({0, .5, 1}), 2), {0.0, 1.0, 0.0});
    const auto t = to_piecewise(tent);
    EXPECT_NEAR(t(0.5), 1.0, 1e-15);
    EXPECT_NEAR(t(0.25), 0.5, 1e-15);
    EXPECT_NEAR(t(1.0), 0.0, 1e-15);
}

TEST(ToPiecewise, AgreesWithPointEvaluation) {
    Rng rng(59);
    for (int k = 1; k <= 6; ++k) {
        const auto s = random_spline(rng, BSplineBasis(oracle::random_partition(rng, 5), k));
        const auto f = to_piecewise(s);
        for (int i = 0; i <= 300; ++i) ASSERT_NEAR(f(i / 300.0), s(i / 300.0), 1e-12);
    }
}

TEST(RefineCoeffs, Examples) {
    const Spline c(build_basis(Partition(), 1), {3.5});
    const auto r = refine_coeffs(c, Partition({0, .5, 1}));
    ASSERT_EQ(r.coeffs.size(), 2u);
    EXPECT_EQ(r.coeffs[0], 3.5);
    EXPECT_EQ(r.coeffs[1], 3.5);

    const Spline lin(build_basis(Partition(), 2), {0.0, 1.0});
    const auto l = refine_coeffs(lin, Partition({0, .5, 1}));
    ASSERT_EQ(l.coeffs.size(), 3u);
    EXPECT_NEAR(l.coeffs[0], 0.0, 1e-15);
    EXPECT_NEAR(l.coeffs[1], 0.5, 1e-15);
    EXPECT_NEAR(l.coeffs[2], 1.0, 1e-15);

    Rng rng(61);
    const auto s = random_spline(rng, BSplineBasis(Partition({0, .4, 1}), 3));
    EXPECT_EQ(refine_coeffs(s, s.basis.partition()).coeffs, s.coeffs);
}

TEST(RefineCoeffs, PreservesFunctionAndIsConvex) {
    Rng rng(67);
    for (int k = 1; k <= 6; ++k)
        for (int trial = 0; trial < 20; ++trial) {
            const auto filt = oracle::random_filtration(rng, 2 + rng.index(8));
            const BSplineBasis coarse(filt.level(0 + rng.index(filt.size() - 1)), k);
            const auto s = random_spline(rng, coarse);
            const auto r = refine_coeffs(s, filt.finest());
            for (int i = 0; i <= 100; ++i) ASSERT_NEAR(r(i / 100.0), s(i / 100.0), 1e-12);
            // Each fine coefficient is a convex combination of the coarse
            // coefficients whose supports contain the fine support.
            for (std::size_t j = 0; j < r.basis.dim(); ++j) {
                double lo = kInf, hi = -kInf;
                for (std::size_t i = 0; i < coarse.dim(); ++i)
                    if (coarse.support(i).contains(r.basis.support(j))) {
                        lo = std::min(lo, s.coeffs[i]);
                        hi = std::max(hi, s.coeffs[i]);
                    }
                ASSERT_LE(lo, hi);
                ASSERT_GE(r.coeffs[j], lo - 1e-12);
                ASSERT_LE(r.coeffs[j], hi + 1e-12);
            }
        }
}

TEST(Stability, Examples) {
    const Spline step(build_basis(Partition({0, .3, 1}), 1), {2.0, -5.0});
    const auto rep = stability_check(step, 2.0);
    EXPECT_NEAR(rep.coefficient_ratio, 1.0, 1e-14);
    EXPECT_NEAR(rep.norm_ratio, 1.0, 1e-14);

    const auto b = build_basis(Partition({0, .2, .7, 1}), 3);
    const Spline one(b, std::vector<double>(b.dim(), 1.0));
    EXPECT_NEAR(stability_check(one, kInf).norm_ratio, 1.0, 1e-14);
}

TEST(Stability, RandomOrderThreeRatiosAreFinite) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(trial_seed(5, seed));
        const auto s = random_spline(rng, BSplineBasis(oracle::random_partition(rng, 8), 3));
        const auto rep = stability_check(s, 2.0);
        ASSERT_TRUE(std::isfinite(rep.coefficient_ratio));
        ASSERT_GT(rep.norm_ratio, 0.0);
        worst = std::max(worst, rep.coefficient_ratio);
        std::vector<Interval> parts;
        for (int i = 0; i < 3; ++i) {
            const double a = rng.uniform();
            parts.push_back({a, std::min(1.0, a + 0.05)});
        }
        const double c = stab_estimate(s, IntervalUnion(parts));
        ASSERT_TRUE(std::isfinite(c));
    }
    RecordProperty("max_coefficient_ratio", std::to_string(worst));
}
