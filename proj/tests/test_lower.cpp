#include <gtest/gtest.h>

#include "pir/cfg.hpp"
#include "pir/lower.hpp"
#include "pir/text.hpp"
#include "pir/verify.hpp"
#include "support.hpp"

using namespace pir;

namespace {

const char* kPrograms[] = {"answer", "diamond", "deopt_stub", "mandelbrot_like", "promise_effects",
                           "reflect_heavy", "loop_nested", "nested_closure", "vectors"};

// Naive liveness: r is live before (b, i) if some path from there reaches a
// use of r before any definition of r. Phi inputs are used at the end of the
// matching predecessor.
bool live_oracle(const Code& c, Reg r, int b0, int i0) {
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> work{{b0, i0}};
    while (!work.empty()) {
        auto [b, i] = work.back();
        work.pop_back();
        if (!seen.insert({b, i}).second) continue;
        const auto& instrs = c.blocks[b].instrs;
        if (i == static_cast<int>(instrs.size())) {
            for (BlockId s : successors(c.blocks[b])) {
                int si = c.index_of(s);
                for (auto& in : c.blocks[si].instrs) {
                    if (in.op != Op::Phi) break;
                    for (size_t k = 0; k < in.args.size(); ++k)
                        if (in.targets[k] == c.blocks[b].id && in.args[k].is(r)) return true;
                }
                work.push_back({si, 0});
            }
            continue;
        }
        const Instr& in = instrs[i];
        bool used = false;
        if (in.op != Op::Phi)
            in.for_each_operand([&](const Operand& a) { used |= a.is(r); });
        if (used) return true;
        if (in.dst == r) continue;
        work.push_back({b, i + 1});
    }
    return false;
}

}  // namespace

TEST(Lower, MainAndFunctions) {
    Program p = compile_source("f <- function(x) { g <- function() x; g }\nf(1)");
    EXPECT_EQ(p.entry, "main");
    ASSERT_EQ(p.order.size(), 3u);
    EXPECT_TRUE(p.fn("main").top_level);
    const Function& f = p.fn(p.order[1]);
    EXPECT_EQ(f.params, std::vector<std::string>{"x"});
    EXPECT_FALSE(f.nested);
    EXPECT_TRUE(p.fn(p.order[2]).nested);
    EXPECT_EQ(p.stable_globals.count("f"), 1u);
    EXPECT_TRUE(verify_program(p).empty());
}

TEST(Lower, FrameEnvBindsParameters) {
    Program p = compile_source("f <- function(a, b) a\nf(1, 2)");
    const Version& v = p.fn("f").baseline();
    const Instr* mk = nullptr;
    for (auto& in : v.body.blocks[0].instrs)
        if (in.op == Op::MkEnv) mk = &in;
    ASSERT_NE(mk, nullptr);
    EXPECT_EQ(mk->names, (std::vector<std::string>{"a", "b"}));
    EXPECT_TRUE(mk->env.is_global());
    EXPECT_EQ(mk->dst, p.fn("f").entry_env);
}

TEST(Lower, EveryArgumentBecomesAPromise) {
    Program p = compile_source("f <- function(a) a\nf(1 + 2)\nf(3)");
    const Version& m = p.fn("main").baseline();
    int mkargs = 0;
    for (auto& b : m.body.blocks)
        for (auto& in : b.instrs) mkargs += in.op == Op::MkArg;
    EXPECT_EQ(mkargs, 2);
    EXPECT_EQ(m.promises.size(), 2u);
}

TEST(Lower, StrictPositions) {
    mr::ExprPtr e = mr::parse("f(x)\ny <- 1\nz <- g()\nif (a) b");
    EXPECT_TRUE(strict_position(*e->kids[0], 0));
    EXPECT_FALSE(strict_position(*e->kids[0], 1));
    EXPECT_FALSE(strict_position(*e->kids[1], 0));
    EXPECT_TRUE(strict_position(*e->kids[2], 0));
    EXPECT_TRUE(strict_position(*e->kids[3], 0));
}

TEST(Lower, LivenessMatchesPathOracle) {
    for (const char* n : kPrograms) {
        Program p = testing_support::optimized(testing_support::read_corpus(std::string(n) + ".mr"));
        for (auto& [id, fn] : p.functions)
            for (auto& v : fn.versions) {
                const Code& c = v.body;
                auto live = live_before(c);
                Locations locs(c);
                std::set<Reg> regs;
                for (auto& b : c.blocks)
                    for (auto& in : b.instrs)
                        if (in.dst != kNoReg) regs.insert(in.dst);
                for (size_t b = 0; b < c.blocks.size(); ++b)
                    for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
                        int l = locs.at(static_cast<int>(b), static_cast<int>(i));
                        for (Reg r : regs)
                            ASSERT_EQ(live[l].count(r) != 0,
                                      live_oracle(c, r, static_cast<int>(b), static_cast<int>(i)))
                                << n << ":" << id << " %" << r << " at " << l;
                    }
            }
    }
}

TEST(Lower, CheckpointsFollowEveryCodeRunningInstruction) {
    for (const char* n : kPrograms) {
        Program p = compile_source(testing_support::read_corpus(std::string(n) + ".mr"));
        for (auto& [id, fn] : p.functions) {
            const Code& c = fn.baseline().body;
            ASSERT_FALSE(fn.checkpoints.empty());
            EXPECT_EQ(fn.checkpoints[0].id, 0);
            EXPECT_EQ(fn.checkpoints[0].after, kNoReg);
            size_t want = 1;
            for (auto& b : c.blocks)
                for (auto& in : b.instrs)
                    if (in.op == Op::Call || in.op == Op::Force || in.op == Op::LdFun) {
                        ++want;
                        const Checkpoint* cp = fn.checkpoint_after(in.dst);
                        ASSERT_NE(cp, nullptr) << id << " %" << in.dst;
                        EXPECT_EQ(fn.checkpoint(cp->id), cp);
                    }
            EXPECT_EQ(fn.checkpoints.size(), want) << n << ":" << id;
            for (size_t i = 0; i < fn.checkpoints.size(); ++i) EXPECT_EQ(fn.checkpoints[i].id, static_cast<int>(i));
        }
    }
}

// Resuming from a checkpoint with only its recorded registers gives the same
// run, so the live sets are sufficient.
TEST(Lower, CheckpointLiveSetsAreSufficient) {
    for (const char* n : kPrograms) {
        Program p = compile_source(testing_support::read_corpus(std::string(n) + ".mr"));
        RunOptions ro;
        RunResult plain = run(p, ro);
        ro.checkpoint_roundtrip = true;
        RunResult rt = run(p, ro);
        EXPECT_EQ(plain.outcome(), rt.outcome()) << n;
        EXPECT_EQ(plain.trace, rt.trace) << n;
    }
}

TEST(Lower, DeterministicOutput) {
    std::string src = testing_support::read_corpus("mandelbrot_like.mr");
    EXPECT_EQ(print_program(compile_source(src)), print_program(compile_source(src)));
}
