#include <gtest/gtest.h>

#include <cmath>

#include "splinegale/error.hpp"
#include "splinegale/g_construction.hpp"
#include "splinegale/random.hpp"
#include "test_util.hpp"

using namespace splinegale;

namespace {

AdaptedSequence random_adapted(Rng& rng, const Filtration& filt, int k) {
    std::vector<Spline> members;
    for (const auto& level : filt.levels()) {
        const BSplineBasis b(level, k);
        std::vector<double> c(b.dim());
        for (double& v : c) v = rng.normal();
        members.emplace_back(b, std::move(c));
    }
    return adapted_from_splines(filt, k, std::move(members));
}

AdaptedSequence root_five_fixture() {
    const Filtration filt({Partition(), Partition({0, .5, 1})});
    return adapted_from_splines(filt, 1,
                                {Spline(BSplineBasis(filt.level(0), 1), {1.0}),
                                 Spline(BSplineBasis(filt.level(1), 1), {2.0, 0.0})});
}

}  // namespace

TEST(BuildG, ConstantSingleLevel) {
    const Filtration filt({Partition()});
    for (int k = 1; k <= 3; ++k) {
        const auto fs = adapted_from_splines(filt, k, {Spline(BSplineBasis(Partition(), k), std::vector<double>(k, -1.5))});
        const auto gs = build_g(fs, 0);
        for (double c : gs.g[0].coeffs) EXPECT_NEAR(c, 1.5, 1e-14);
        const auto v = verify_g(gs);
        EXPECT_NEAR(v.max_ratio, 1.0, 1e-12);
    }
}

TEST(BuildG, RootFiveFixture) {
    const auto gs = build_g(root_five_fixture(), 1);
    ASSERT_EQ(gs.g.size(), 2u);
    EXPECT_NEAR(gs.g[0].coeffs[0], 1.0, 1e-15);
    EXPECT_NEAR(gs.g[1].coeffs[0], std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(gs.g[1].coeffs[1], 1.0, 1e-15);
    const double expected = (std::sqrt(5.0) + 1.0) / 2.0;
    EXPECT_NEAR(gs.mean_g[1], expected, 1e-14);
    EXPECT_NEAR(gs.mean_sqrt_x[1], expected, 1e-14);
    const auto v = verify_g(gs);
    EXPECT_NEAR(v.ratios[1], 1.0, 1e-12);
    EXPECT_GE(v.min_increment, 0.0);
    EXPECT_NEAR(v.min_majorant, 0.0, 1e-12);
}

TEST(BuildG, ArgmaxIsSmallestAttainingPair) {
    const auto gs = build_g(root_five_fixture(), 1);
    EXPECT_EQ(gs.argmax[1][0], (std::pair<std::size_t, std::size_t>{1, 0}));
    EXPECT_EQ(gs.argmax[1][1], (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(BuildG, PropertiesOnRandomInstances) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng(trial_seed(53, seed));
        const int k = 1 + static_cast<int>(seed % 3);
        const auto filt = oracle::random_filtration(rng, 2 + rng.index(10));
        const auto fs = random_adapted(rng, filt, k);
        const auto gs = build_g(fs, fs.size() - 1);
        GVerification v;
        ASSERT_NO_THROW(v = verify_g(gs)) << seed;
        EXPECT_GE(v.min_increment, -1e-10);
        EXPECT_GE(v.min_majorant, -1e-10);
        EXPECT_TRUE(std::isfinite(v.max_ratio));
        EXPECT_GE(v.max_ratio, 1.0 - 1e-12);
        for (const auto& g : gs.g)
            for (double c : g.coeffs) EXPECT_GE(c, 0.0);
    }
}

TEST(BuildG, RejectsLevelBeyondSequence) {
    try {
        build_g(root_five_fixture(), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
    }
}

TEST(LevelSet, Examples) {
    EXPECT_EQ(level_set(PiecewisePolynomial::constant(2.0), 1.5).measure(), 1.0);
    const auto x = PiecewisePolynomial::from_monomials(std::vector<double>{0, 1});
    const auto s = level_set(x, 0.125);
    ASSERT_EQ(s.parts().size(), 1u);
    EXPECT_NEAR(s.parts()[0].lo, 0.125, 1e-15);
    EXPECT_EQ(s.parts()[0].hi, 1.0);
}

TEST(LevelSet, ComplementPartitionsTheDomain) {
    Rng rng(59);
    for (int trial = 0; trial < 50; ++trial) {
        const Partition grid = oracle::random_partition(rng, 3);
        std::vector<std::vector<double>> pieces(3);
        for (auto& p : pieces) p = {rng.normal(), rng.normal(), rng.normal()};
        const PiecewisePolynomial f(grid, pieces);
        const double t = rng.normal() * 0.5;
        const auto above = level_set(f, t);
        const auto below = level_set(scale(f, -1.0), -t);
        EXPECT_NEAR(above.measure() + below.minus(above).measure(), 1.0, 1e-12);
        for (const auto& part : above.parts()) EXPECT_GE(f(part.mid()), t - 1e-12);
    }
}

TEST(LevelSet, RemezThresholdForQuadratics) {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const PiecewisePolynomial f(Partition(), {{rng.normal(), rng.normal(), rng.normal()}});
        const double thr = sup_norm(f) / 64.0;
        const auto pos = level_set(f, thr), neg = level_set(scale(f, -1.0), thr);
        EXPECT_GE(pos.measure() + neg.measure(), 0.5 - 1e-12);
    }
}

TEST(GreedyPhi, SingleChoiceIsLeftmost) {
    PhiInstance inst;
    inst.a = {{0.0, 0.5}};
    inst.level = {0};
    inst.d = {{0.0, 1.0}};
    inst.b = {IntervalUnion{{0.0, 0.5}}};
    inst.c1 = 0.5;
    const auto phi = greedy_phi(inst);
    ASSERT_EQ(phi[0].parts().size(), 1u);
    EXPECT_EQ(phi[0].parts()[0].lo, 0.0);
    EXPECT_NEAR(phi[0].parts()[0].hi, 0.25, 1e-15);
    EXPECT_TRUE(verify_phi(inst, phi).pass);
}

TEST(GreedyPhi, TightNestedInstance) {
    PhiInstance inst;
    inst.a = {{0.0, 0.25}, {0.5, 0.75}};
    inst.level = {0, 1};
    inst.d = {{0.0, 1.0}, {0.0, 0.5}};
    inst.b = {IntervalUnion{{0.0, 0.5}}, IntervalUnion{{0.0, 0.25}}};
    inst.c1 = 1.0;
    const auto demand = phi_demand(inst);
    EXPECT_NEAR(demand[0], inst.b[0].measure(), 1e-15);
    EXPECT_NEAR(demand[1], inst.b[1].measure(), 1e-15);
    const auto phi = greedy_phi(inst);
    const auto v = verify_phi(inst, phi);
    EXPECT_TRUE(v.pass);
    EXPECT_NEAR(phi[0].united(phi[1]).measure(), inst.b[0].measure(), 1e-15);
    EXPECT_NEAR(phi[0].parts()[0].lo, 0.25, 1e-15);
}

TEST(GreedyPhi, InvalidInstancesAreRejected) {
    PhiInstance inst;
    inst.a = {{0.0, 0.5}};
    inst.level = {0};
    inst.d = {{0.0, 0.5}};
    inst.b = {IntervalUnion{{0.4, 0.6}}};
    inst.c1 = 0.1;
    try {
        greedy_phi(inst);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InstanceInvalid);
    }
    inst.b = {IntervalUnion{{0.0, 0.1}}};
    inst.c1 = 0.5;
    try {
        greedy_phi(inst);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InstanceInvalid);
    }
}

TEST(GreedyPhi, RandomInstances) {
    Rng rng(67);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_phi_instance(rng, 2 + rng.index(8), 2 + static_cast<int>(rng.index(5)));
        ASSERT_NO_THROW(validate_phi_instance(inst));
        std::vector<IntervalUnion> phi;
        ASSERT_NO_THROW(phi = greedy_phi(inst)) << trial;
        EXPECT_TRUE(verify_phi(inst, phi).pass) << trial;
    }
}
