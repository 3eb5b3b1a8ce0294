#include <gtest/gtest.h>

#include <cmath>

#include "splinegale/error.hpp"
#include "splinegale/kernel_ops.hpp"
#include "splinegale/random.hpp"
#include "test_util.hpp"

using namespace splinegale;

namespace {

PiecewisePolynomial random_pp(Rng& rng, std::size_t atoms, int order) {
    const Partition grid = oracle::random_partition(rng, atoms);
    std::vector<std::vector<double>> pieces(atoms);
    for (auto& p : pieces)
        for (int d = 0; d < order; ++d) p.push_back(rng.normal());
    return PiecewisePolynomial(grid, pieces);
}

// K(x, t) = sum_{i, j} q^{|i - j|} / |hull(E_i, E_j)| 1_{E_i}(x) 1_{E_j}(t), with
// supports taken from the oracle knot vector and half-open membership.
double kernel_pointwise(const Partition& p, int k, double q, double x, double t) {
    const auto kn = oracle::knots(p, k);
    const std::size_t dim = p.atom_count() + static_cast<std::size_t>(k) - 1;
    auto in = [&](std::size_t i, double y) { return kn[i] <= y && y < kn[i + static_cast<std::size_t>(k)]; };
    double v = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            if (in(i, x) && in(j, t)) {
                const double lo = std::min(kn[i], kn[j]);
                const double hi = std::max(kn[i + static_cast<std::size_t>(k)], kn[j + static_cast<std::size_t>(k)]);
                v += std::pow(q, std::abs(static_cast<double>(i) - static_cast<double>(j))) / (hi - lo);
            }
    return v;
}

}  // namespace

TEST(BuildT, TwoAtomExample) {
    const auto t = build_T(Partition({0, .5, 1}), 1, 0.5);
    EXPECT_NEAR(t.cells(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(t.cells(1, 1), 2.0, 1e-15);
    EXPECT_NEAR(t.cells(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(t.row_mass[0], 1.25, 1e-15);
    EXPECT_NEAR(t.row_mass[1], 1.25, 1e-15);
    EXPECT_EQ(t.lower_bound(), 1.0);
    EXPECT_EQ(t.upper_bound(), 8.0);
}

TEST(BuildT, SingleAtom) {
    for (double q : {0.1, 0.5, 0.9}) {
        const auto t = build_T(Partition(), 1, q);
        EXPECT_EQ(t.cells(0, 0), 1.0);
        EXPECT_EQ(t.row_mass[0], 1.0);
    }
}

TEST(BuildT, UniformFourAtomsOrderTwo) {
    const auto t = build_T(Partition({0, .25, .5, .75, 1}), 2, 0.5);
    for (double m : t.row_mass) {
        EXPECT_GE(m, 2.0);
        EXPECT_LE(m, 12.0);
    }
}

TEST(BuildT, RejectsBadDecayBase) {
    for (double q : {0.0, 1.0, -0.3}) {
        try {
            build_T(Partition(), 2, q);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParameterError);
        }
    }
}

TEST(BuildT, MatchesPointwiseKernelAndIsSymmetric) {
    Rng rng(107);
    for (int k = 1; k <= 4; ++k)
        for (double q : {0.5, 0.7, 0.9}) {
            const Partition p = oracle::random_partition(rng, 2 + rng.index(6));
            const auto t = build_T(p, k, q);
            for (std::size_t a = 0; a < p.atom_count(); ++a) {
                double mass = 0.0;
                for (std::size_t b = 0; b < p.atom_count(); ++b) {
                    const double ref = kernel_pointwise(p, k, q, p.atom(a).mid(), p.atom(b).mid());
                    ASSERT_NEAR(t.cells(a, b), ref, 1e-12 * ref);
                    ASSERT_EQ(t.cells(a, b), t.cells(b, a));
                    mass += ref * p.atom(b).length();
                }
                ASSERT_NEAR(t.row_mass[a], mass, 1e-12 * mass);
            }
            EXPECT_GE(t.bound_slack(), -1e-12);
        }
}

TEST(ApplyT, Examples) {
    const auto t = build_T(Partition({0, .5, 1}), 1, 0.5);
    const auto one = apply_T(t, PiecewisePolynomial::constant(1.0));
    EXPECT_NEAR(one(0.2), 1.25, 1e-15);
    EXPECT_NEAR(one(0.8), 1.25, 1e-15);
    const auto half = apply_T(t, PiecewisePolynomial::indicator(0, 0.5));
    EXPECT_NEAR(half(0.2), 1.0, 1e-15);
    EXPECT_NEAR(half(0.8), 0.25, 1e-15);
}

TEST(ApplyT, PositiveSelfAdjointAndBounded) {
    Rng rng(109);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(rng.index(4));
        const double q = 0.5 + 0.4 * rng.uniform();
        const auto t = build_T(oracle::random_partition(rng, 1 + rng.index(8)), k, q);
        const auto f = random_pp(rng, 1 + rng.index(4), 3);
        const auto g = random_pp(rng, 1 + rng.index(4), 2);
        const auto tf = apply_T(t, f), tg = apply_T(t, g);
        EXPECT_LE(std::abs(integrate(tf * g) - integrate(f * tg)), 1e-11 * (1.0 + abs_integral(f) * sup_norm(g)));
        const double bound = t.upper_bound();
        EXPECT_LE(abs_integral(tf), bound * abs_integral(f) * (1.0 + 1e-12));
        EXPECT_LE(sup_norm(tf), bound * sup_norm(f) * (1.0 + 1e-12));
        const auto tabs = apply_T_abs_values(t, f);
        for (double v : tabs) EXPECT_GE(v, 0.0);
    }
}

TEST(Jensen, ConstantIsEquality) {
    const auto t = build_T(Partition({0, .3, 1}), 1, 0.5);
    const auto rep = jensen_check(t, PiecewisePolynomial::constant(1.5), ConvexPhi::Square);
    EXPECT_NEAR(rep.max_violation, 0.0, 1e-12);
    EXPECT_TRUE(rep.pass);
}

TEST(Jensen, IndicatorIsStrict) {
    const auto t = build_T(Partition({0, .5, 1}), 1, 0.5);
    const auto rep = jensen_check(t, PiecewisePolynomial::indicator(0, 0.5), ConvexPhi::Square);
    // Per atom: LHS = (1, 1/16), RHS = (5/4, 5/16).
    EXPECT_NEAR(rep.max_violation, -0.25, 1e-12);
    EXPECT_TRUE(rep.pass);
}

TEST(Jensen, RandomFunctionsAllPhi) {
    Rng rng(113);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(rng.index(3));
        const auto t = build_T(oracle::random_partition(rng, 1 + rng.index(6)), k, 0.5 + 0.4 * rng.uniform());
        const auto f = random_pp(rng, 1 + rng.index(4), 3);
        for (ConvexPhi phi : {ConvexPhi::Square, ConvexPhi::Abs, ConvexPhi::ExpCapped})
            EXPECT_TRUE(jensen_check(t, f, phi).pass) << to_string(phi);
    }
}

TEST(ExpCapped, IsConvexAndContinuous) {
    EXPECT_EQ(exp_capped(1.0), std::exp(1.0));
    EXPECT_NEAR(exp_capped(kExpCap + 1e-9), std::exp(kExpCap), std::exp(kExpCap) * 1e-8);
    EXPECT_NEAR(exp_capped(kExpCap + 2.0), std::exp(kExpCap) * 3.0, 1e8);
}

TEST(Maximal, Examples) {
    EXPECT_NEAR(maximal_lower(PiecewisePolynomial::constant(1.0), 0.37), 1.0, 1e-15);
    const auto ind = PiecewisePolynomial::indicator(0, 0.5);
    EXPECT_NEAR(maximal_lower(ind, 0.75), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(maximal_lower(ind, 0.25), 1.0, 1e-12);
}

TEST(Domination, SingleAtomOrderOne) {
    const Partition p;
    const auto rep = domination_check(Projector(p, 1), build_T(p, 1, 0.5), PiecewisePolynomial::indicator(0.2, 0.9));
    EXPECT_NEAR(rep.c1_hat, 1.0, 1e-12);
}

TEST(Domination, SplineInputAndZeroFunction) {
    Rng rng(127);
    const Partition p = oracle::random_partition(rng, 6);
    const auto f = random_pp(rng, 3, 2);
    const auto rep = domination_check(Projector(p, 2), build_T(p, 2, 0.7), f);
    EXPECT_TRUE(std::isfinite(rep.c1_hat));
    EXPECT_GT(rep.c1_hat, 0.0);
    try {
        domination_check(Projector(p, 2), build_T(p, 2, 0.7), PiecewisePolynomial::constant(0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroFunction);
    }
}

TEST(Tower, SingleAtomIsOne) {
    const auto rep = tower_check(Partition(), Partition(), 1, 1, 0.5, 0.5, 0.8, PiecewisePolynomial::constant(1.0));
    EXPECT_NEAR(rep.c_hat, 1.0, 1e-12);
}

TEST(Tower, HandCellSums) {
    const Partition coarse({0, .5, 1}), fine({0, .25, .5, 1});
    // T_{F,1/2,1} applied to 1 on the three fine atoms.
    const double len[] = {0.25, 0.25, 0.5};
    const double lo[] = {0, 0.25, 0.5}, hi[] = {0.25, 0.5, 1};
    double tf[3] = {};
    for (int c = 0; c < 3; ++c)
        for (int b = 0; b < 3; ++b)
            tf[c] += std::pow(0.5, std::abs(c - b)) / (std::max(hi[c], hi[b]) - std::min(lo[c], lo[b])) * len[b];
    const double coarse_int[] = {tf[0] * 0.25 + tf[1] * 0.25, tf[2] * 0.5};
    const double st[] = {2.0 * coarse_int[0] + 0.5 * coarse_int[1], 0.5 * coarse_int[0] + 2.0 * coarse_int[1]};
    const double dominant = 2.0 * 0.5 + 0.8 * 0.5;
    const double expected = std::max(st[0], st[1]) / dominant;
    const auto rep = tower_check(coarse, fine, 1, 1, 0.5, 0.5, 0.8, PiecewisePolynomial::constant(1.0));
    EXPECT_NEAR(rep.c_hat, expected, 1e-13);
    EXPECT_EQ(rep.gamma, 1.0);
}

TEST(Tower, RequiresLargerDecayBase) {
    try {
        tower_check(Partition(), Partition(), 1, 1, 0.5, 0.6, 0.6, PiecewisePolynomial::constant(1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParameterError);
    }
}

TEST(Tower, RandomNestedPairsAreFinite) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(trial_seed(19, seed));
        const auto filt = oracle::random_filtration(rng, 8);
        const int k = 1 + static_cast<int>(rng.index(3)), kp = 1 + static_cast<int>(rng.index(3));
        const auto rep = tower_check(filt.level(3), filt.finest(), k, kp, 0.5, 0.5, 0.7, random_pp(rng, 3, 3));
        EXPECT_TRUE(std::isfinite(rep.c_hat));
    }
}

TEST(KernelProduct, SingleAtomIsOne) {
    const auto s = build_T(Partition(), 1, 0.5);
    EXPECT_NEAR(kernel_product_check(s, s, 0.8), 1.0, 1e-15);
}

TEST(KernelProduct, TwoLevelDyadic) {
    const Partition coarse({0, .5, 1}), fine({0, .25, .5, .75, 1});
    const auto s = build_T(coarse, 1, 0.5), t = build_T(fine, 1, 0.5);
    const double q = 0.8;
    // Cell enumeration with the closed-form entries of both kernels.
    auto ks = [](int a, int b) { return a == b ? 2.0 : 0.5; };
    auto kt = [](int c, int b) {
        const double lo = 0.25 * std::min(c, b), hi = 0.25 * (std::max(c, b) + 1);
        return std::pow(0.5, std::abs(c - b)) / (hi - lo);
    };
    auto kr = [&](int a, int b) { return a == b ? 2.0 : q / 1.0; };
    double c_min = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b) {
            double lhs = 0.0;
            for (int c = 0; c < 4; ++c) lhs += ks(a, c / 2) * kt(c, b) * 0.25;
            c_min = std::max(c_min, lhs / kr(a, b / 2));
        }
    EXPECT_NEAR(kernel_product_check(s, t, q), c_min, 1e-13);
}

TEST(DefaultQ, RoundsUpToGrid) {
    EXPECT_EQ(default_q(Partition({0, .5, 1}), 1), 0.5);
    std::vector<double> u;
    for (int i = 0; i <= 8; ++i) u.push_back(i / 8.0);
    const double q = default_q(Partition(u), 3);
    EXPECT_TRUE(q == 0.5 || q == 0.7 || q == 0.9 || (q > 0.9 && q < 1.0));
}

TEST(ToolLepingle, SingleConstantTerm) {
    const Filtration filt({Partition()});
    const std::vector<PiecewisePolynomial> fs{PiecewisePolynomial::constant(1.5)};
    const auto rep = tool_lepingle_check(filt, 1, 1, 0, fs, 2.0, 0.5);
    EXPECT_NEAR(rep.lhs_p, 2.25, 1e-14);
    EXPECT_NEAR(rep.lhs_t, 2.25, 1e-14);
    EXPECT_NEAR(rep.rhs, 2.25, 1e-14);
    EXPECT_LE(rep.ratio_p, 1.0 + 1e-14);
    EXPECT_LE(rep.ratio_t, 1.0 + 1e-14);
}

TEST(ToolLepingle, ConditionalExpectationOracle) {
    const auto filt = oracle::dyadic_filtration(8);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(trial_seed(23, seed));
        std::vector<PiecewisePolynomial> fs;
        for (std::size_t l = 0; l < filt.size(); ++l) fs.push_back(random_pp(rng, 3, 2));
        for (double p : {1.0, 2.0, 3.0}) {
            const auto rep = tool_lepingle_check(filt, 1, 1, 0, fs, p, 0.5);
            // From the trivial level every projection is the mean, so the P-form is a contraction.
            EXPECT_LE(rep.ratio_p, 1.0 + 1e-9);
            EXPECT_GE(rep.ratio_t, rep.ratio_p - 1e-12);
        }
    }
}
