#include <gtest/gtest.h>

#include <numeric>

#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/random.hpp"
#include "test_util.hpp"

using namespace splinegale;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InternalExhaustion;
}

}  // namespace

TEST(Atoms, TrivialPartition) {
    const auto a = atoms(Partition());
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].lo, 0.0);
    EXPECT_EQ(a[0].length(), 1.0);
}

TEST(Atoms, Halves) {
    const auto a = atoms(Partition({0, 0.5, 1}));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].length(), 0.5);
    EXPECT_EQ(a[1].length(), 0.5);
}

TEST(Atoms, Quarter) {
    const auto a = atoms(Partition({0, 0.25, 1}));
    EXPECT_EQ(a[0].length(), 0.25);
    EXPECT_EQ(a[1].length(), 0.75);
}

TEST(Partition, RejectsBadBreakpoints) {
    EXPECT_EQ(code_of([] { Partition({0.1, 1}); }), ErrorCode::InvalidPartition);
    EXPECT_EQ(code_of([] { Partition({0, 0.5, 0.5, 1}); }), ErrorCode::InvalidPartition);
    EXPECT_EQ(code_of([] { Partition({0, 1e-12, 1}); }), ErrorCode::AtomTooSmall);
}

TEST(Partition, LocateUsesHalfOpenAtoms) {
    const Partition p({0, 0.25, 0.5, 1});
    EXPECT_EQ(p.locate(0.0), 0u);
    EXPECT_EQ(p.locate(0.25), 1u);
    EXPECT_EQ(p.locate(0.49), 1u);
    EXPECT_EQ(p.locate(0.5), 2u);
    EXPECT_EQ(p.locate(1.0), 2u);
}

TEST(IsRefinement, Examples) {
    EXPECT_TRUE(is_refinement(Partition({0, .25, .5, 1}), Partition({0, .5, 1})));
    EXPECT_FALSE(is_refinement(Partition({0, .5, 1}), Partition({0, .25, 1})));
    const Partition p({0, 0.3, 1});
    EXPECT_TRUE(is_refinement(p, p));
}

TEST(SplitAtom, Examples) {
    EXPECT_EQ(split_atom(Partition(), 0, 0.5), Partition({0, 0.5, 1}));
    EXPECT_EQ(split_atom(Partition({0, 0.5, 1}), 1, 0.5), Partition({0, 0.5, 0.75, 1}));
    EXPECT_EQ(code_of([] { split_atom(Partition(), 0, 1e-15); }), ErrorCode::AtomTooSmall);
    EXPECT_EQ(code_of([] { split_atom(Partition(), 1, 0.5); }), ErrorCode::IndexOutOfRange);
}

TEST(SplitAtom, ChainsAreNestedAndSumToOne) {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Partition> chain{Partition()};
        for (int n = 0; n < 20; ++n) {
            const auto& last = chain.back();
            chain.push_back(split_atom(last, rng.index(last.atom_count()), rng.uniform(0.01, 0.99)));
        }
        for (std::size_t later = 0; later < chain.size(); ++later)
            for (std::size_t earlier = 0; earlier <= later; ++earlier)
                ASSERT_TRUE(is_refinement(chain[later], chain[earlier]));
        for (const auto& p : chain) {
            const auto a = atoms(p);
            double total = 0.0;
            for (const auto& i : a) {
                ASSERT_GT(i.length(), 0.0);
                total += i.length();
            }
            EXPECT_NEAR(total, 1.0, 1e-14);
        }
    }
}

TEST(Filtration, ValidatesNestingAndElementarySteps) {
    EXPECT_EQ(code_of([] { Filtration({Partition({0, .5, 1}), Partition({0, .25, 1})}); }), ErrorCode::NotARefinement);
    EXPECT_EQ(code_of([] { Filtration({Partition(), Partition({0, .25, .5, 1})}, true); }),
              ErrorCode::InvalidPartition);
    const Filtration f({Partition(), Partition({0, .5, 1}), Partition({0, .5, .75, 1})}, true);
    EXPECT_EQ(f.size(), 3u);
    EXPECT_EQ(f.finest().atom_count(), 3u);
}

TEST(CommonRefinement, MergesBreakpoints) {
    const auto c = common_refinement(Partition({0, .3, 1}), Partition({0, .5, 1}));
    EXPECT_EQ(c, Partition({0, .3, .5, 1}));
}

TEST(IntervalUnion, NormalizesAndMeasures) {
    const IntervalUnion u{{0.5, 0.7}, {0.1, 0.2}, {0.15, 0.3}, {0.4, 0.4}};
    ASSERT_EQ(u.parts().size(), 2u);
    EXPECT_DOUBLE_EQ(u.measure(), 0.2 + 0.2);
    const IntervalUnion v{{0.25, 0.6}};
    EXPECT_NEAR(u.intersect(v).measure(), 0.05 + 0.1, 1e-15);
    EXPECT_NEAR(u.minus(v).measure(), 0.15 + 0.1, 1e-15);
    EXPECT_NEAR(u.leftmost(0.25).measure(), 0.25, 1e-15);
    EXPECT_EQ(u.leftmost(0.25).parts().back().hi, 0.55);
    EXPECT_TRUE(u.intersect(v).subset_of(u));
}
