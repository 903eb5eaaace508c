#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pir/ir.hpp"

namespace pir {

struct PassContext {
    const Program& prog;
    const Function& fn;
};

/// Every pass returns whether it changed the version.
bool resolve_loads(const PassContext& ctx, Version& v);
bool dead_store_elim(const PassContext& ctx, Version& v);
bool elide_environments(const PassContext& ctx, Version& v);
bool speculate_stub_envs(const PassContext& ctx, Version& v);
bool delay_environments(const PassContext& ctx, Version& v);
/// Inlines the call at body position (block index, instr index) if eligible.
bool inline_closure(const PassContext& ctx, Version& v, int block, int index);
/// Inlines every eligible call site.
bool inline_closures(const PassContext& ctx, Version& v);
bool inline_promises(const PassContext& ctx, Version& v);
bool cleanup(const PassContext& ctx, Version& v);

using PassFn = bool (*)(const PassContext&, Version&);

/// Names accepted by --passes, in canonical order.
const std::vector<std::string>& pass_names();
PassFn find_pass(const std::string& name);

struct PipelineOptions {
    std::vector<std::string> passes;
    int fuel = 4;  // rounds over the pass list
    bool eager_version = true;
    /// Called after every pass application (also when it rolled back).
    std::function<void(const Function&, size_t version, const std::string& pass, const Version&)> on_step;
};

/// The default ordered pass list; flags drop scope resolution or promise inlining.
PipelineOptions default_pipeline(bool scope = true, bool promise_inline = true);

struct PipelineReport {
    std::vector<std::string> rollbacks;  // "fn:pass: reason"
};

/// Appends optimized versions to every function; baselines stay untouched.
PipelineReport run_pipeline(Program& prog, const PipelineOptions& opts);

}  // namespace pir
