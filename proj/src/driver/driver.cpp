#include <cstdio>

#include "pir/driver.hpp"
#include "pir/lower.hpp"
#include "pir/verify.hpp"

namespace pir {

PipelineOptions make_pipeline(const PipelineConfig& cfg) {
    PipelineOptions o = default_pipeline(cfg.scope, cfg.promise_inline);
    if (!cfg.passes.empty()) {
        o.passes.clear();
        for (auto& p : cfg.passes) {
            if (!cfg.scope && p == "scope") continue;
            if (!cfg.promise_inline && p == "promise-inline") continue;
            o.passes.push_back(p);
        }
    }
    return o;
}

DiffResult diff_program(const std::string& source, const PipelineOptions& opts, const RunOptions& run_opts) {
    DiffResult d;
    Program p = compile_source(source);
    RunOptions base = run_opts;
    base.selector = VersionSelector::Baseline;
    d.baseline = run(p, base);
    PipelineReport rep = run_pipeline(p, opts);
    for (auto& r : rep.rollbacks) {
        d.problems.push_back("rollback " + r);
        d.internal_error = true;
    }
    for (auto& e : verify_program(p)) {
        d.problems.push_back("verify " + e);
        d.internal_error = true;
    }
    RunOptions opt = run_opts;
    opt.selector = VersionSelector::Optimized;
    d.optimized = run(p, opt);
    d.match = true;
    if (d.baseline.outcome() != d.optimized.outcome()) {
        d.match = false;
        d.problems.push_back("outcome " + d.baseline.outcome() + " vs " + d.optimized.outcome());
    }
    if (d.baseline.trace != d.optimized.trace) {
        d.match = false;
        size_t i = 0;
        while (i < d.baseline.trace.size() && i < d.optimized.trace.size() &&
               d.baseline.trace[i] == d.optimized.trace[i])
            ++i;
        std::string a = i < d.baseline.trace.size() ? d.baseline.trace[i] : "<end>";
        std::string b = i < d.optimized.trace.size() ? d.optimized.trace[i] : "<end>";
        d.problems.push_back("trace line " + std::to_string(i + 1) + ": " + a + " vs " + b);
    }
    return d;
}

const char* env_class_name(EnvClass c) {
    switch (c) {
        case EnvClass::Full: return "full";
        case EnvClass::Stub: return "stub";
        case EnvClass::None: return "none";
    }
    return "?";
}

EnvClass classify_env(const Version& v) {
    EnvClass c = EnvClass::None;
    for (auto& b : v.body.blocks) {
        if (b.instrs.back().op == Op::Deopt) continue;
        for (auto& in : b.instrs) {
            if (in.op != Op::MkEnv) continue;
            if (!in.stub) return EnvClass::Full;
            c = EnvClass::Stub;
        }
    }
    return c;
}

std::vector<std::pair<std::string, EnvClass>> classify_program(const Program& p) {
    std::vector<std::pair<std::string, EnvClass>> out;
    for (auto& id : p.order) {
        const Function& f = p.fn(id);
        if (f.top_level) continue;
        out.push_back({id, classify_env(f.versions.back())});
    }
    return out;
}

StatsRow program_stats(const std::string& name, const std::string& source, const PipelineOptions& opts) {
    StatsRow r;
    r.program = name;
    Program p = compile_source(source);
    RunResult base = run(p, {});
    run_pipeline(p, opts);
    RunOptions o;
    o.selector = VersionSelector::Optimized;
    RunResult opt = run(p, o);
    r.outputs_match = base.outcome() == opt.outcome() && base.trace == opt.trace;

    auto classes = classify_program(p);
    r.closures_compiled = static_cast<int>(classes.size());
    int full = 0, stub = 0, none = 0;
    for (auto& [id, c] : classes) {
        (c == EnvClass::Full ? full : c == EnvClass::Stub ? stub : none)++;
    }
    if (r.closures_compiled) {
        double n = r.closures_compiled;
        r.pct_full_env = 100.0 * full / n;
        r.pct_stub_env = 100.0 * stub / n;
        r.pct_no_env = 100.0 * none / n;
    }
    r.baseline_envs_created = base.counters.envs_created + base.counters.stub_envs_created;
    r.optimized_envs_created = opt.counters.envs_created + opt.counters.stub_envs_created;
    if (r.baseline_envs_created)
        r.reduction_pct = 100.0 * (static_cast<double>(r.baseline_envs_created) -
                                   static_cast<double>(r.optimized_envs_created)) /
                          static_cast<double>(r.baseline_envs_created);
    if (r.optimized_envs_created)
        r.stubbed_share_pct =
            100.0 * static_cast<double>(opt.counters.stub_envs_created) / static_cast<double>(r.optimized_envs_created);
    return r;
}

std::string format_stats(const StatsRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "program=%s closures_compiled=%d pct_full_env=%.1f pct_stub_env=%.1f pct_no_env=%.1f "
                  "baseline_envs_created=%llu optimized_envs_created=%llu reduction_pct=%.1f "
                  "stubbed_share_pct=%.1f outputs_match=%d",
                  r.program.c_str(), r.closures_compiled, r.pct_full_env, r.pct_stub_env, r.pct_no_env,
                  static_cast<unsigned long long>(r.baseline_envs_created),
                  static_cast<unsigned long long>(r.optimized_envs_created), r.reduction_pct, r.stubbed_share_pct,
                  r.outputs_match ? 1 : 0);
    return buf;
}

}  // namespace pir
