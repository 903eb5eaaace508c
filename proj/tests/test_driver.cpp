#include <gtest/gtest.h>

#include "pir/driver.hpp"
#include "pir/frontend.hpp"
#include "pir/lower.hpp"
#include "pir/text.hpp"
#include "support.hpp"

using namespace pir;
using testing_support::read_corpus;

TEST(Driver, GeneratorIsDeterministic) {
    for (uint64_t s : {0ull, 1ull, 17ull, 123456789ull}) {
        EXPECT_EQ(generate_program(s, 6), generate_program(s, 6));
        EXPECT_EQ(generate_program(s, 6, 0.3), generate_program(s, 6, 0.3));
    }
    EXPECT_NE(generate_program(1, 6), generate_program(2, 6));
}

TEST(Driver, GeneratedProgramsParseAndTerminate) {
    for (uint64_t s = 0; s < 100; ++s) {
        std::string src = generate_program(s, 1 + static_cast<int>(s % kMaxGenSize), (s % 3) * 0.2);
        ASSERT_NO_THROW(mr::parse(src)) << src;
        RunResult r = run(compile_source(src));
        EXPECT_NE(r.error == ErrorKind::StepLimit && !r.ok, true) << src;
        EXPECT_NE(r.error == ErrorKind::StackOverflow && !r.ok, true) << src;
    }
}

TEST(Driver, ReflectionFreeProgramsAvoidReflectiveBuiltins) {
    for (uint64_t s = 0; s < 100; ++s) {
        std::string src = generate_program(s, 8, 0.0);
        for (const char* b : {"assign(", "get(", "rm(", "sys.frame(", "parent.frame(", "environment("})
            EXPECT_EQ(src.find(b), std::string::npos) << src;
    }
}

TEST(Driver, ReflectiveRateAddsReflection) {
    int with = 0;
    for (uint64_t s = 0; s < 50; ++s) {
        std::string src = generate_program(s, 8, 1.0);
        for (const char* b : {"assign(", "get(", "rm(", "sys.frame(", "parent.frame("})
            if (src.find(b) != std::string::npos) {
                ++with;
                break;
            }
    }
    EXPECT_GT(with, 40);
}

TEST(Driver, DiffMatchesOnCorpus) {
    for (const char* n : {"answer", "deopt_stub", "twister_bad", "vectors"}) {
        DiffResult d = diff_program(read_corpus(std::string(n) + ".mr"), default_pipeline());
        EXPECT_TRUE(d.match) << n;
        EXPECT_FALSE(d.internal_error) << n;
        EXPECT_TRUE(d.problems.empty()) << n;
    }
}

TEST(Driver, MakePipelineFiltersFlags) {
    PipelineConfig cfg;
    cfg.passes = {"scope", "cleanup", "promise-inline"};
    cfg.scope = false;
    EXPECT_EQ(make_pipeline(cfg).passes, (std::vector<std::string>{"cleanup", "promise-inline"}));
    cfg.promise_inline = false;
    EXPECT_EQ(make_pipeline(cfg).passes, std::vector<std::string>{"cleanup"});
    EXPECT_EQ(make_pipeline({}).passes, default_pipeline().passes);
}

TEST(Driver, ClassifyEnv) {
    EXPECT_EQ(classify_env(parse_ir("%0 = LdConst [1] 1\nReturn(%0)\n")), EnvClass::None);
    EXPECT_EQ(classify_env(parse_ir("e0 = MkEnv(: G)\n%1 = LdVar(x, e0)\nReturn(%1)\n")), EnvClass::Full);
    EXPECT_EQ(classify_env(parse_ir("e0 = MkEnv(: G) stub\n%1 = LdConst [1] 1\nReturn(%1)\n")), EnvClass::Stub);
    // envs only created on the way to a Deopt do not count
    EXPECT_EQ(classify_env(parse_ir("BB0:\n  %0 = LdArg(0)\n  Branch(%0, BB1, BB2)\n"
                                    "BB1:\n  e1 = MkEnv(: G)\n  Deopt(cp0, e1)\n"
                                    "BB2:\n  Return(%0)\n")),
              EnvClass::None);
}

// Recounting from the printed program agrees with the in-memory classification.
TEST(Driver, ClassificationMatchesPrintedIr) {
    for (const char* n : {"answer", "diamond", "deopt_stub", "mandelbrot_like", "reflect_heavy", "loop_calls",
                          "get_secret", "twister_sysframe"}) {
        Program p = testing_support::optimized(read_corpus(std::string(n) + ".mr"));
        auto recount = testing_support::recount_from_text(print_program(p));
        for (auto& [id, c] : classify_program(p)) {
            ASSERT_TRUE(recount.count(id)) << n << ":" << id;
            EXPECT_EQ(recount.at(id), c) << n << ":" << id;
        }
    }
}

TEST(Driver, StatsRow) {
    StatsRow r = program_stats("answer", read_corpus("answer.mr"), default_pipeline());
    EXPECT_EQ(r.closures_compiled, 1);
    EXPECT_EQ(r.pct_no_env, 100.0);
    // the global env plus one frame; the frame goes away
    EXPECT_EQ(r.baseline_envs_created, 2u);
    EXPECT_EQ(r.optimized_envs_created, 1u);
    EXPECT_EQ(r.reduction_pct, 50.0);
    EXPECT_TRUE(r.outputs_match);
    std::string line = format_stats(r);
    for (const char* key : {"program=answer", "closures_compiled=1", "pct_full_env=0.0", "pct_stub_env=0.0",
                            "pct_no_env=100.0", "baseline_envs_created=2", "optimized_envs_created=1",
                            "reduction_pct=50.0", "outputs_match=1"})
        EXPECT_NE(line.find(key), std::string::npos) << key << " in " << line;
}

TEST(Driver, StatsCountStubs) {
    StatsRow r = program_stats("deopt_stub", read_corpus("deopt_stub.mr"), default_pipeline());
    EXPECT_GT(r.pct_stub_env, 0.0);
    EXPECT_GT(r.stubbed_share_pct, 0.0);
    EXPECT_TRUE(r.outputs_match);
}
