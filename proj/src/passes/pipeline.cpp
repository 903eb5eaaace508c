#include <stdexcept>

#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "pir/verify.hpp"

namespace pir {

namespace {

struct Entry {
    const char* name;
    PassFn fn;
};

const Entry kPasses[] = {
    {"cleanup", cleanup},
    {"scope", resolve_loads},
    {"dse", dead_store_elim},
    {"inline", inline_closures},
    {"promise-inline", inline_promises},
    {"stub-env", speculate_stub_envs},
    {"delay-env", delay_environments},
    {"elide-env", elide_environments},
};

bool wants_eager_version(const Function& fn) {
    if (fn.top_level || fn.params.empty()) return false;
    const Version& base = fn.baseline();
    Effects fx = compute_effects(base, &fn);
    for (auto& b : base.body.blocks)
        for (auto& in : b.instrs)
            if (in.op == Op::LdArg && fx.of(Operand::of(in.dst)) == MayPromise::Any) return true;
    return false;
}

Version optimize(Program& prog, const Function& fn, Version v, size_t index, const PipelineOptions& opts,
                 PipelineReport& report) {
    PassContext ctx{prog, fn};
    VerifyContext vc{fn.param_count(), fn.nested, &fn};
    for (int round = 0; round < opts.fuel; ++round) {
        bool any = false;
        for (auto& name : opts.passes) {
            PassFn pass = find_pass(name);
            if (!pass) throw std::invalid_argument("unknown pass: " + name);
            Version before = v;
            bool changed = false;
            try {
                changed = pass(ctx, v);
                if (changed) {
                    auto errs = verify(v, vc);
                    if (!errs.empty()) throw std::runtime_error("verify: " + errs.front());
                }
            } catch (const std::exception& ex) {
                report.rollbacks.push_back(fn.id + ":" + name + ": " + ex.what());
                v = std::move(before);
                changed = false;
            }
            if (opts.on_step) opts.on_step(fn, index, name, v);
            any |= changed;
        }
        if (!any) break;
    }
    return v;
}

}  // namespace

const std::vector<std::string>& pass_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (auto& e : kPasses) n.push_back(e.name);
        return n;
    }();
    return names;
}

PassFn find_pass(const std::string& name) {
    for (auto& e : kPasses)
        if (name == e.name) return e.fn;
    return nullptr;
}

PipelineOptions default_pipeline(bool scope, bool promise_inline) {
    PipelineOptions o;
    for (const char* p : {"cleanup", "scope", "dse", "inline", "cleanup", "scope", "promise-inline", "scope", "dse",
                          "stub-env", "scope", "dse", "delay-env", "elide-env", "cleanup"}) {
        std::string s = p;
        if (!scope && s == "scope") continue;
        if (!promise_inline && s == "promise-inline") continue;
        o.passes.push_back(s);
    }
    return o;
}

PipelineReport run_pipeline(Program& prog, const PipelineOptions& opts) {
    PipelineReport report;
    for (auto& id : prog.order) {
        Function& fn = prog.fn(id);
        Version base = fn.baseline();
        base.assumptions.clear();
        base.carriers.clear();
        Version opt = optimize(prog, fn, base, fn.versions.size(), opts, report);
        bool eager = opts.eager_version && wants_eager_version(fn);
        fn.versions.push_back(std::move(opt));
        if (eager) {
            base.assumptions.insert(Assumption::EagerArgs);
            Version ev = optimize(prog, fn, base, fn.versions.size(), opts, report);
            fn.versions.push_back(std::move(ev));
        }
    }
    return report;
}

}  // namespace pir
