#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pir/analysis.hpp"
#include "pir/driver.hpp"
#include "pir/interp.hpp"
#include "pir/ir.hpp"
#include "pir/passes.hpp"

namespace testing_support {

std::string corpus_path(const std::string& name);
std::string read_corpus(const std::string& name);

/// Lowered and optimized with the given pipeline.
pir::Program optimized(const std::string& source, const pir::PipelineOptions& opts = pir::default_pipeline());

pir::RunResult run_opt(const pir::Program& p, const pir::RunOptions& base = {});

/// Opcode multiset of a version body, e.g. {"LdConst", "Return"}.
std::multiset<std::string> opcodes(const pir::Version& v);

// ---------------------------------------------------------------- oracles

/// Random CFG with `n` blocks: every block ends in Return or a Branch with
/// one or two distinct targets.
pir::Code random_cfg(std::mt19937_64& rng, int n);

/// Dominance by deletion: a dominates b iff b is unreachable from the entry
/// once a is removed (a == b counts). Unreachable b has no dominators.
bool dominates_by_removal(const pir::Code& c, int a, int b);

/// Random scope state over `d`; non-Top cells draw from eps and `locs`.
pir::ScopeState random_scope_state(std::mt19937_64& rng, const pir::ScopeDomain& d, const std::vector<int>& locs);

/// Random promise state of `n` slots; Forced entries draw from `locs`.
pir::PromState random_prom_state(std::mt19937_64& rng, size_t n, const std::vector<int>& locs);

/// Interpreter hook that checks every observed LdVar against the scope
/// analysis of the version the executing code belongs to.
class ScopeSoundness : public pir::InterpHooks {
  public:
    explicit ScopeSoundness(const pir::Program& p);
    void on_load(const pir::Code& code, int loc, const pir::EnvObj& env, const std::string& var,
                 const pir::Binding* found) override;

    int checked = 0;
    std::vector<std::string> violations;

  private:
    struct Entry {
        const pir::Version* version;
        pir::ScopeResult scope;
    };
    std::map<const pir::Code*, Entry> by_code_;
};

/// Recounts MkEnv classes from printed program text, by function.
std::map<std::string, pir::EnvClass> recount_from_text(const std::string& program_text);

/// Verifies and re-runs the program after every pass that changed a version;
/// returns problems (empty = all good). Baseline behavior is the reference.
std::vector<std::string> check_every_step(const std::string& source, const pir::PipelineOptions& opts);

}  // namespace testing_support
