#include <gtest/gtest.h>

#include "pir/interp.hpp"
#include "pir/lower.hpp"
#include "support.hpp"

using namespace pir;

namespace {

std::string outcome(const std::string& src, RunOptions ro = {}) { return run(compile_source(src), ro).outcome(); }

}  // namespace

TEST(Interp, Arithmetic) {
    EXPECT_EQ(outcome("1 + 2 * 3"), "[7]");
    EXPECT_EQ(outcome("10 - 4 - 3"), "[3]");
    EXPECT_EQ(outcome("1 < 2"), "[TRUE]");
    EXPECT_EQ(outcome("2 == 3"), "[FALSE]");
    EXPECT_EQ(outcome("1:4"), "[1,2,3,4]");
    EXPECT_EQ(outcome("3:1"), "[3,2,1]");
}

TEST(Interp, VectorsRecycleShorterOperand) {
    EXPECT_EQ(outcome("c(1, 2, 3) + 1"), "[2,3,4]");
    EXPECT_EQ(outcome("c(1, 2) * c(3, 4)"), "[3,8]");
    EXPECT_EQ(outcome("c(\"a\", \"b\")"), "[\"a\",\"b\"]");
    EXPECT_EQ(outcome("c()"), "NULL");
}

TEST(Interp, Errors) {
    EXPECT_EQ(outcome("y"), "error: unbound-variable");
    EXPECT_EQ(outcome("x <- 1\nx()"), "error: not-a-function");
    EXPECT_EQ(outcome("f <- function(a) a\nf(1, 2)"), "error: arity-mismatch");
    EXPECT_EQ(outcome("1 + \"a\""), "error: type-error");
    EXPECT_EQ(outcome("if (c(FALSE, TRUE)) 1 else 2"), "[2]");  // first element decides
    EXPECT_EQ(outcome("if (c()) 1"), "error: type-error");
    EXPECT_EQ(outcome("f <- function() f()\nf()"), "error: stack-overflow");
    RunOptions ro;
    ro.step_limit = 1000;
    EXPECT_EQ(outcome("while (TRUE) 1", ro), "error: step-limit");
}

TEST(Interp, ArgumentsAreLazy) {
    EXPECT_EQ(outcome("f <- function(a, b) a\nf(1, undefined_thing)"), "[1]");
    EXPECT_EQ(outcome("k <- 0\nf <- function(a) { a; a; a }\nf({k <- k + 1; k})\nk"), "[1]");
    EXPECT_EQ(outcome("f <- function(a) a\nf(a)"), "error: unbound-variable");
}

TEST(Interp, PromisesRunInTheCallerEnvironment) {
    EXPECT_EQ(outcome("x <- 1\nf <- function(a) { x <- 2; a }\nf(x)"), "[1]");
}

TEST(Interp, ClosuresCaptureDefinitionEnv) {
    EXPECT_EQ(outcome("mk <- function(n) function() n\ng <- mk(5)\ng()"), "[5]");
}

TEST(Interp, FunctionLookupSkipsNonFunctions) {
    EXPECT_EQ(outcome("f <- function(c) c(c, 1)\nf(2)"), "[2,1]");
}

TEST(Interp, ReflectiveBuiltins) {
    EXPECT_EQ(outcome("f <- function() { assign(\"z\", 5, environment()); z }\nf()"), "[5]");
    EXPECT_EQ(outcome("g <- function() assign(\"q\", 1, parent.frame())\nf <- function() { g(); q }\nf()"), "[1]");
    EXPECT_EQ(outcome("f <- function() { v <- 1; rm(\"v\", environment()); v }\nf()"), "error: unbound-variable");
    EXPECT_EQ(outcome("v <- 3\nf <- function() get(\"v\", sys.frame(0))\nf()"), "[3]");
}

TEST(Interp, CorpusExpectations) {
    for (const char* n : {"answer", "diamond", "nested_closure", "twister_lazy_cond", "twister_c", "twister_bad",
                          "twister_sysframe", "get_secret", "deopt_stub", "mandelbrot_like", "reflect_heavy",
                          "loop_sum", "loop_nested", "loop_calls", "promise_effects", "vectors"}) {
        std::string expect = testing_support::read_corpus(std::string(n) + ".expect");
        while (!expect.empty() && (expect.back() == '\n' || expect.back() == ' ')) expect.pop_back();
        EXPECT_EQ(outcome(testing_support::read_corpus(std::string(n) + ".mr")), expect) << n;
    }
}

TEST(Interp, TraceRecordsBuiltinsAndResult) {
    RunResult r = run(compile_source("c(1, 2)"));
    ASSERT_FALSE(r.trace.empty());
    EXPECT_EQ(r.trace.back(), "EVT result [1,2]");
    EXPECT_EQ(r.trace.front().rfind("EVT builtin c(", 0), 0u);
    RunResult e = run(compile_source("nope"));
    EXPECT_EQ(e.trace.back(), "EVT error unbound-variable");
}

TEST(Interp, CountersCountAllocations) {
    // the global env, one frame per call, one promise per argument
    RunResult r = run(compile_source("f <- function(a) a\nf(1)\nf(2 + 1)"));
    EXPECT_EQ(r.counters.calls, 2u);
    EXPECT_EQ(r.counters.envs_created, 3u);
    EXPECT_EQ(r.counters.promises_created, 2u);
    EXPECT_EQ(r.counters.promises_forced, 2u);
    RunResult lazy = run(compile_source("f <- function(a) 1\nf(2)"));
    EXPECT_EQ(lazy.counters.promises_created, 1u);
    EXPECT_EQ(lazy.counters.promises_forced, 0u);
}

TEST(Interp, Folding) {
    auto sum = fold_binop(BinopKind::Add, Vec::number(1), Vec::number(2));
    ASSERT_TRUE(sum);
    EXPECT_EQ(*sum, Vec::number(3));
    EXPECT_FALSE(fold_binop(BinopKind::Add, Vec::number(1), Vec::string("a")));
    EXPECT_EQ(fold_truthy(Vec::logical(false)), std::optional<bool>(false));
    EXPECT_EQ(fold_truthy(Vec::number(2)), std::optional<bool>(true));
    EXPECT_FALSE(fold_truthy(Vec::null()));
}

TEST(Interp, LoadHookSeesBindings) {
    struct Hook : InterpHooks {
        std::vector<std::pair<std::string, bool>> seen;
        void on_load(const Code&, int, const EnvObj&, const std::string& var, const Binding* found) override {
            seen.push_back({var, found != nullptr});
        }
    } hook;
    RunOptions ro;
    ro.hooks = &hook;
    ro.track_writers = true;
    run(compile_source("y <- 1\nf <- function() { x <- 2; x + y }\nf()"), ro);
    std::vector<std::pair<std::string, bool>> want{{"x", true}, {"y", false}};
    EXPECT_EQ(hook.seen, want);
}
