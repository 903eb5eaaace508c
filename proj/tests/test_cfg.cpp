#include <gtest/gtest.h>

#include "pir/cfg.hpp"
#include "pir/text.hpp"
#include "support.hpp"

using namespace pir;
using testing_support::dominates_by_removal;
using testing_support::random_cfg;

TEST(Cfg, SuccessorsAndPredecessors) {
    Version v = parse_ir(
        "BB0:\n  %0 = LdConst [1] TRUE\n  Branch(%0, BB1, BB2)\n"
        "BB1:\n  Branch BB2\n"
        "BB2:\n  Return(%0)\n");
    Cfg g(v.body);
    EXPECT_EQ(g.succs[0], (std::vector<int>{1, 2}));
    EXPECT_EQ(g.preds[2].size(), 2u);
    EXPECT_TRUE(g.succs[2].empty());
}

TEST(Cfg, DominatorsMatchRemovalOracle) {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        int n = 1 + static_cast<int>(rng() % 12);
        Code c = random_cfg(rng, n);
        DomInfo d = compute_dominators(c);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                ASSERT_EQ(d.dominates_block(a, b), dominates_by_removal(c, a, b))
                    << "iter " << iter << " a=" << a << " b=" << b;
    }
}

TEST(Cfg, IdomIsTheClosestStrictDominator) {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 200; ++iter) {
        int n = 2 + static_cast<int>(rng() % 10);
        Code c = random_cfg(rng, n);
        DomInfo d = compute_dominators(c);
        for (int b = 1; b < n; ++b) {
            if (!d.reachable[b]) {
                EXPECT_EQ(d.idom[b], -1);
                continue;
            }
            int i = d.idom[b];
            ASSERT_GE(i, 0);
            EXPECT_TRUE(dominates_by_removal(c, i, b));
            for (int a = 0; a < n; ++a)
                if (a != b && dominates_by_removal(c, a, b)) EXPECT_TRUE(dominates_by_removal(c, a, i));
        }
    }
}

// DF(a) = { b | a dominates a predecessor of b and does not strictly dominate b }
TEST(Cfg, FrontierMatchesDefinition) {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 200; ++iter) {
        int n = 1 + static_cast<int>(rng() % 12);
        Code c = random_cfg(rng, n);
        DomInfo d = compute_dominators(c);
        Cfg g(c);
        for (int a = 0; a < n; ++a) {
            if (!d.reachable[a]) continue;
            std::set<int> want;
            for (int b = 0; b < n; ++b) {
                if (!d.reachable[b]) continue;
                bool strict = a != b && dominates_by_removal(c, a, b);
                if (strict) continue;
                for (int p : g.preds[b])
                    if (d.reachable[p] && dominates_by_removal(c, a, p)) want.insert(b);
            }
            EXPECT_EQ(d.frontier[a], want) << "iter " << iter << " a=" << a;
        }
    }
}

TEST(Cfg, IteratedFrontierIsClosed) {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 100; ++iter) {
        int n = 2 + static_cast<int>(rng() % 10);
        Code c = random_cfg(rng, n);
        DomInfo d = compute_dominators(c);
        std::set<int> seed{static_cast<int>(rng() % n)};
        std::set<int> idf = iterated_frontier(d, seed);
        std::set<int> closure = seed;
        for (bool grew = true; grew;) {
            grew = false;
            for (int x : std::set<int>(closure))
                for (int y : d.frontier[x]) grew |= closure.insert(y).second;
        }
        std::set<int> want;
        for (int x : seed)
            for (int y : d.frontier[x]) want.insert(y);
        for (int x : idf)
            for (int y : d.frontier[x]) want.insert(y);
        EXPECT_EQ(idf, want);
        for (int x : idf) EXPECT_TRUE(closure.count(x));
    }
}

TEST(Cfg, InstructionDominance) {
    Version v = parse_ir(
        "BB0:\n  %0 = LdConst [1] TRUE\n  Branch(%0, BB1, BB2)\n"
        "BB1:\n  %1 = LdConst [1] 1\n  Return(%1)\n"
        "BB2:\n  Return(%0)\n");
    DomInfo d = compute_dominators(v.body);
    EXPECT_TRUE(dominates(d, {0, 0}, {0, 1}));
    EXPECT_FALSE(dominates(d, {0, 1}, {0, 0}));
    EXPECT_FALSE(dominates(d, {0, 0}, {0, 0}));
    EXPECT_TRUE(dominates(d, {0, 1}, {1, 0}));
    EXPECT_FALSE(dominates(d, {1, 0}, {2, 0}));
}

TEST(Cfg, RemoveUnreachableDropsPhiInputs) {
    Version v = parse_ir(
        "BB0:\n  %0 = LdConst [1] 1\n  Branch BB2\n"
        "BB1:\n  %1 = LdConst [1] 2\n  Branch BB2\n"
        "BB2:\n  %2 = Phi(BB0:%0, BB1:%1)\n  Return(%2)\n");
    EXPECT_TRUE(remove_unreachable(v.body));
    ASSERT_EQ(v.body.blocks.size(), 2u);
    const Instr& phi = v.body.block(2).instrs[0];
    ASSERT_EQ(phi.args.size(), 1u);
    EXPECT_EQ(phi.targets, (std::vector<BlockId>{0}));
    EXPECT_FALSE(remove_unreachable(v.body));
}
