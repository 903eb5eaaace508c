#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pir/interp.hpp"
#include "pir/ir.hpp"
#include "pir/passes.hpp"

namespace pir {

constexpr int kMaxGenSize = 12;

/// Deterministic mini-R program. Loops are counter-bounded and functions only
/// call earlier ones, so every program terminates. `reflective_rate` is the
/// chance that a statement slot becomes a reflective builtin call.
std::string generate_program(uint64_t seed, int size, double reflective_rate = 0.0);

struct PipelineConfig {
    std::vector<std::string> passes;  // empty: the default list
    bool scope = true;
    bool promise_inline = true;
};

PipelineOptions make_pipeline(const PipelineConfig& cfg);

struct DiffResult {
    bool match = false;
    bool internal_error = false;  // verifier failure or rolled back pass
    RunResult baseline;
    RunResult optimized;
    std::vector<std::string> problems;
};

/// Runs the baseline, optimizes, runs again, and compares outcome and trace.
DiffResult diff_program(const std::string& source, const PipelineOptions& opts, const RunOptions& run = {});

enum class EnvClass { Full, Stub, None };

const char* env_class_name(EnvClass c);

/// Static classification of a version, ignoring blocks that end in Deopt.
EnvClass classify_env(const Version& v);

struct StatsRow {
    std::string program;
    int closures_compiled = 0;
    double pct_full_env = 0, pct_stub_env = 0, pct_no_env = 0;
    uint64_t baseline_envs_created = 0;
    uint64_t optimized_envs_created = 0;  // full plus stub allocations
    double reduction_pct = 0;
    double stubbed_share_pct = 0;
    bool outputs_match = false;
};

/// Per-function classification of the last optimized version of every
/// non-top-level function, in definition order.
std::vector<std::pair<std::string, EnvClass>> classify_program(const Program& p);

StatsRow program_stats(const std::string& name, const std::string& source, const PipelineOptions& opts);

/// One key=value record per line.
std::string format_stats(const StatsRow& r);

}  // namespace pir
