#include <gtest/gtest.h>

#include "pir/analysis.hpp"
#include "pir/lower.hpp"
#include "pir/text.hpp"
#include "pir/verify.hpp"
#include "support.hpp"

using namespace pir;

namespace {

struct Analyzed {
    Program prog;
    const Function* fn;
    const Version* v;
    Effects fx;
};

Analyzed baseline_of(const std::string& src, const std::string& fn) {
    Analyzed a{compile_source(src), nullptr, nullptr, {}};
    a.fn = &a.prog.fn(fn);
    a.v = &a.fn->baseline();
    a.fx = compute_effects(*a.v, a.fn);
    return a;
}

// Flat location of the first instruction with op `op` (and name, if given).
int loc_of(const Version& v, Op op, const std::string& name = "") {
    Locations locs(v.body);
    for (size_t b = 0; b < v.body.blocks.size(); ++b)
        for (size_t i = 0; i < v.body.blocks[b].instrs.size(); ++i) {
            auto& in = v.body.blocks[b].instrs[i];
            if (in.op == op && (name.empty() || in.name == name))
                return locs.at(static_cast<int>(b), static_cast<int>(i));
        }
    return -1;
}

const Instr& instr_at(const Version& v, int loc) {
    Locations locs(v.body);
    for (size_t b = 0; b < v.body.blocks.size(); ++b)
        for (size_t i = 0; i < v.body.blocks[b].instrs.size(); ++i)
            if (locs.at(static_cast<int>(b), static_cast<int>(i)) == loc) return v.body.blocks[b].instrs[i];
    throw std::out_of_range("loc");
}

}  // namespace

TEST(Analysis, AbsCellLattice) {
    AbsCell a = AbsCell::single(1), b = AbsCell::single(2);
    AbsCell j = a;
    j.join(b);
    EXPECT_EQ(j.locs, (std::set<int>{1, 2}));
    EXPECT_TRUE(a.leq(j));
    EXPECT_FALSE(j.leq(a));
    EXPECT_TRUE(j.leq(AbsCell::make_top()));
    EXPECT_FALSE(AbsCell::make_top().leq(j));
    j.join(AbsCell::make_top());
    EXPECT_TRUE(j.top);
    EXPECT_TRUE(AbsCell{}.empty());
    EXPECT_TRUE((AbsCell{false, {AbsCell::kEps}}).has_eps());
}

TEST(Analysis, PromAbsIsFlat) {
    using K = PromAbs::Kind;
    PromAbs f1 = PromAbs::of(K::Forced, 1), f2 = PromAbs::of(K::Forced, 2);
    PromAbs j = f1;
    j.join(f2);
    EXPECT_EQ(j.kind, K::Top);
    PromAbs u = PromAbs::of(K::Unreached);
    u.join(f1);
    EXPECT_EQ(u, f1);
    EXPECT_TRUE(PromAbs::of(K::Unreached).leq(PromAbs::of(K::Bot)));
    EXPECT_FALSE(PromAbs::of(K::Bot).leq(PromAbs::of(K::Leaked)));
    EXPECT_TRUE(PromAbs::of(K::Leaked).leq(PromAbs::of(K::Top)));
}

TEST(Analysis, StraightLineStoreResolves) {
    auto a = baseline_of(testing_support::read_corpus("answer.mr"), "f");
    ScopeResult s = scope_fixpoint(*a.v, a.fx);
    int ld = loc_of(*a.v, Op::LdVar, "answer");
    int st = loc_of(*a.v, Op::StVar, "answer");
    const AbsCell* c = s.cell(ld, instr_at(*a.v, ld).env.reg, "answer");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->locs, std::set<int>{st});
}

TEST(Analysis, BranchesJoinStores) {
    auto a = baseline_of(testing_support::read_corpus("diamond.mr"), "f");
    ScopeResult s = scope_fixpoint(*a.v, a.fx);
    int ld = loc_of(*a.v, Op::LdVar, "x");
    const AbsCell* c = s.cell(ld, instr_at(*a.v, ld).env.reg, "x");
    ASSERT_NE(c, nullptr);
    EXPECT_FALSE(c->top);
    EXPECT_EQ(c->locs.size(), 2u);
    EXPECT_FALSE(c->has_eps());
    // flag is never stored locally: only eps
    int lf = loc_of(*a.v, Op::LdVar, "flag");
    const AbsCell* cf = s.cell(lf, instr_at(*a.v, lf).env.reg, "flag");
    ASSERT_NE(cf, nullptr);
    EXPECT_EQ(cf->locs, std::set<int>{AbsCell::kEps});
}

TEST(Analysis, OneArmedStoreKeepsEps) {
    Version v = parse_ir(
        "BB0:\n  e0 = MkEnv(: G)\n  %1 = LdConst [1] TRUE\n  Branch(%1, BB1, BB2)\n"
        "BB1:\n  %3 = LdConst [1] 1\n  StVar(x, %3, e0)\n  Branch BB2\n"
        "BB2:\n  %6 = LdVar(x, e0)\n  Return(%6)\n");
    ScopeResult s = scope_fixpoint(v, compute_effects(v, nullptr));
    const AbsCell* c = s.cell(loc_of(v, Op::LdVar), 0, "x");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->locs, (std::set<int>{AbsCell::kEps, loc_of(v, Op::StVar)}));
}

TEST(Analysis, ForcingAParameterTaints) {
    // the promise may run arbitrary code when forced
    auto a = baseline_of("f <- function(b) { if (b) x <- 1; x }\nf(TRUE)", "f");
    ScopeResult s = scope_fixpoint(*a.v, a.fx);
    int ld = loc_of(*a.v, Op::LdVar, "x");
    const AbsCell* c = s.cell(ld, instr_at(*a.v, ld).env.reg, "x");
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->top);
}

TEST(Analysis, CallsTaintExposedEnvs) {
    auto a = baseline_of("g <- function() 1\nf <- function() { x <- 1; g(); x }\nf()", "f");
    EXPECT_TRUE(a.fx.any_code_running);
    EXPECT_TRUE(a.fx.exposed.count(a.fn->entry_env));
    ScopeResult s = scope_fixpoint(*a.v, a.fx);
    int ld = loc_of(*a.v, Op::LdVar, "x");
    const AbsCell* c = s.cell(ld, instr_at(*a.v, ld).env.reg, "x");
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->top);
}

TEST(Analysis, EffectsClassifyPromises) {
    auto a = baseline_of("f <- function(a) a\nk <- 0\nf(1 + 2)\nf({k <- k + 1; k})", "main");
    ASSERT_EQ(a.v->promises.size(), 2u);
    EXPECT_EQ(a.fx.pure_promises.size(), 1u);
    auto f = baseline_of("f <- function(a) a\nf(1)", "f");
    int ld = loc_of(*f.v, Op::LdVar, "a");
    EXPECT_EQ(f.fx.of(Operand::of(instr_at(*f.v, ld).dst)), MayPromise::Any);
    int k = loc_of(*a.v, Op::LdConst);
    EXPECT_EQ(a.fx.of(Operand::of(instr_at(*a.v, k).dst)), MayPromise::None);
}

TEST(Analysis, EscapeClassification) {
    auto plain = baseline_of(testing_support::read_corpus("answer.mr"), "f");
    EXPECT_EQ(escape_analysis(*plain.v, plain.fx).at(plain.fn->entry_env), EnvEscape::NoEscape);
    auto called = baseline_of("g <- function() 1\nf <- function() { x <- 1; g(); x }\nf()", "f");
    EXPECT_EQ(escape_analysis(*called.v, called.fx).at(called.fn->entry_env), EnvEscape::StubEligible);
    // reflective builtins go through the stub materialization path
    auto reflect = baseline_of("f <- function() environment()\nf()", "f");
    EXPECT_EQ(escape_analysis(*reflect.v, reflect.fx).at(reflect.fn->entry_env), EnvEscape::StubEligible);
    auto written = baseline_of("g <- function(a) a\nf <- function() { k <- 0; g({k <- k + 1; k}); k }\nf()", "f");
    EXPECT_EQ(escape_analysis(*written.v, written.fx).at(written.fn->entry_env), EnvEscape::Escapes);
    auto closure = baseline_of("f <- function() { y <- 1; function() y }\nf()", "f");
    EXPECT_NE(escape_analysis(*closure.v, closure.fx).at(closure.fn->entry_env), EnvEscape::NoEscape);
}

TEST(Analysis, PromisePassedToACallIsUnknown) {
    auto a = baseline_of("f <- function(a) a\nf(1 + 2)", "main");
    PromiseResult r = promise_fixpoint(*a.v, a.fx);
    ASSERT_EQ(r.mkargs.size(), 1u);
    // leaked into a call that runs code: may or may not be forced afterwards
    Reg mk = r.mkargs.begin()->first;
    EXPECT_EQ(r.final_state.at(mk).kind, PromAbs::Kind::Top);
    EXPECT_FALSE(r.inlinable.count(mk));
}

TEST(Analysis, ForceAfterMkArgIsRecorded) {
    Version v = parse_ir(
        "%0 = MkArg(p0, G)\n"
        "%1 = Force(%0) G\n"
        "%2 = Force(%0) G\n"
        "Return(%2)\n"
        "promise p0(G):\n"
        "  %4 = LdConst [1] 1\n"
        "  Return(%4)\n");
    ASSERT_TRUE(verify(v).empty());
    Effects fx = compute_effects(v, nullptr);
    PromiseResult r = promise_fixpoint(v, fx);
    ASSERT_EQ(r.mkargs.count(0), 1u);
    EXPECT_EQ(r.final_state.at(0), PromAbs::of(PromAbs::Kind::Forced, 1));
    EXPECT_EQ(r.inlinable.at(0), 1);
}

// f(s1 <= s2) implies f(s1) <= f(s2) for the scope and promise transfers.
TEST(Analysis, TransfersAreMonotone) {
    std::mt19937_64 rng(99);
    std::vector<std::string> sources;
    for (const char* n : {"diamond", "deopt_stub", "mandelbrot_like", "reflect_heavy", "promise_effects"})
        sources.push_back(testing_support::read_corpus(std::string(n) + ".mr"));
    int checked = 0;
    for (auto& src : sources) {
        Program p = testing_support::optimized(src);
        for (auto& [id, fn] : p.functions)
            for (auto& v : fn.versions) {
                Effects fx = compute_effects(v, &fn);
                ScopeDomain d = scope_domain(v);
                PromiseResult pr = promise_fixpoint(v, fx);
                std::vector<int> locs;
                Locations L(v.body);
                for (int l = 0; l < static_cast<int>(v.body.instr_count()); ++l) locs.push_back(l);
                for (int l : locs) {
                    const Instr& in = instr_at(v, l);
                    for (int k = 0; k < 10; ++k) {
                        ScopeState s1 = testing_support::random_scope_state(rng, d, locs);
                        ScopeState s2 = s1;
                        s2.join(testing_support::random_scope_state(rng, d, locs));
                        ASSERT_TRUE(s1.leq(s2));
                        ASSERT_TRUE(scope_transfer(d, fx, l, in, s1).leq(scope_transfer(d, fx, l, in, s2)))
                            << id << " at " << l;
                        PromState q1 = testing_support::random_prom_state(rng, pr.mkargs.size(), locs);
                        PromState q2 = q1;
                        PromState extra = testing_support::random_prom_state(rng, pr.mkargs.size(), locs);
                        for (size_t i = 0; i < q2.size(); ++i) q2[i].join(extra[i]);
                        PromState t1 = promise_transfer(pr.mkargs, fx, l, in, q1);
                        PromState t2 = promise_transfer(pr.mkargs, fx, l, in, q2);
                        for (size_t i = 0; i < t1.size(); ++i) ASSERT_TRUE(t1[i].leq(t2[i])) << id << " at " << l;
                        ++checked;
                    }
                }
            }
    }
    EXPECT_GT(checked, 1000);
}

TEST(Analysis, ScopeIsSoundOnCorpus) {
    for (const char* n : {"answer", "diamond", "deopt_stub", "mandelbrot_like", "reflect_heavy", "get_secret",
                          "twister_c", "loop_calls", "promise_effects", "nested_closure"}) {
        Program p = testing_support::optimized(testing_support::read_corpus(std::string(n) + ".mr"));
        for (auto sel : {VersionSelector::Baseline, VersionSelector::Optimized}) {
            testing_support::ScopeSoundness hook(p);
            RunOptions ro;
            ro.selector = sel;
            ro.hooks = &hook;
            ro.track_writers = true;
            run(p, ro);
            EXPECT_TRUE(hook.violations.empty()) << n << ": " << hook.violations.front();
        }
    }
}

TEST(Analysis, DumpIsStable) {
    auto a = baseline_of(testing_support::read_corpus("answer.mr"), "f");
    std::string d = dump_analysis(*a.v, a.fn);
    EXPECT_EQ(d, dump_analysis(*a.v, a.fn));
    EXPECT_NE(d.find("env e0 NoEscape"), std::string::npos);
}
