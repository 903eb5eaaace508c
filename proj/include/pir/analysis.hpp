#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pir/cfg.hpp"
#include "pir/ir.hpp"

namespace pir {

// ---------------------------------------------------------------- effects

/// What a register may hold at runtime with respect to promises.
/// Pure promises cannot run code that writes or reflects when forced.
enum class MayPromise : uint8_t { None, Pure, Any };

/// Flow-insensitive facts about one version used by every analysis.
struct Effects {
    std::map<Reg, MayPromise> mp;         // body and promise registers
    std::set<std::string> pure_promises;  // promise ids
    std::set<Reg> tracked;                // MkEnv registers of the body
    std::map<Reg, Operand> parent;        // MkEnv register -> parent operand
    std::set<Reg> stubs;                  // tracked envs flagged stub
    std::set<Reg> exposed;                // reachable by code run from this version
    std::set<Reg> value_use;              // used as a first-class value
    std::set<Reg> promise_written;        // written by some promise body
    Reg frame_env = kNoReg;               // MkEnv that becomes the frame env
    bool any_code_running = false;        // in the body

    MayPromise of(const Operand& a) const;
    /// Call, LdFun outside G, Force of something that may be an impure promise.
    bool code_running(const Instr& in) const;
    /// Force whose operand may be a promise at all.
    bool may_force(const Instr& in) const;
};

Effects compute_effects(const Version& v, const Function* fn);

// ---------------------------------------------------------------- scope

/// A set of store locations, or Top. kEps stands for "undefined".
struct AbsCell {
    static constexpr int kEps = -1;
    bool top = false;
    std::set<int> locs;

    static AbsCell make_top() { return {true, {}}; }
    static AbsCell single(int l) { return {false, {l}}; }
    bool empty() const { return !top && locs.empty(); }
    bool has_eps() const { return !top && locs.count(kEps) != 0; }
    void join(const AbsCell& o);
    bool leq(const AbsCell& o) const;
    bool operator==(const AbsCell&) const = default;
};

/// Environment registers and variable names a state ranges over.
struct ScopeDomain {
    std::vector<Reg> envs;
    std::vector<std::string> vars;
    std::map<Reg, int> env_index;
    std::map<std::string, int> var_index;

    int env(Reg r) const;                   // -1 if untracked
    int var(const std::string& n) const;    // -1 if unknown
    size_t size() const { return envs.size() * vars.size(); }
    size_t cell(int e, int x) const { return static_cast<size_t>(e) * vars.size() + static_cast<size_t>(x); }
};

struct ScopeState {
    std::vector<AbsCell> cells;
    bool operator==(const ScopeState&) const = default;
    void join(const ScopeState& o);
    bool leq(const ScopeState& o) const;
};

ScopeDomain scope_domain(const Version& v);
ScopeState scope_bottom(const ScopeDomain& d);

/// Transfer including the refinements: stub envs and unexposed envs are
/// never tainted, and only code-running instructions taint.
ScopeState scope_transfer(const ScopeDomain& d, const Effects& fx, int loc, const Instr& in, const ScopeState& s);

struct ScopeResult {
    ScopeDomain domain;
    std::vector<ScopeState> before;  // by flat location
    const AbsCell* cell(int loc, Reg env, const std::string& var) const;
};

ScopeResult scope_fixpoint(const Version& v, const Effects& fx);

// ---------------------------------------------------------------- promises

struct PromAbs {
    enum class Kind : uint8_t { Unreached, Bot, Forced, Leaked, Top };
    Kind kind = Kind::Unreached;
    int loc = -1;  // for Forced

    static PromAbs of(Kind k, int l = -1) { return {k, l}; }
    void join(const PromAbs& o);
    /// Concretization order: Unreached below everything, Top above everything.
    bool leq(const PromAbs& o) const;
    bool operator==(const PromAbs&) const = default;
};

using PromState = std::vector<PromAbs>;

/// `mkargs` maps MkArg registers to slots of the state vector.
PromState promise_transfer(const std::map<Reg, int>& mkargs, const Effects& fx, int loc, const Instr& in,
                           const PromState& s);

struct PromiseResult {
    std::map<Reg, int> mkargs;
    std::vector<PromState> before;      // by flat location
    std::map<Reg, PromAbs> final_state; // joined over Return points
    /// MkArg register -> flat location of its dominating Force, for promises
    /// whose only uses are Forces dominated by that one.
    std::map<Reg, int> inlinable;
};

PromiseResult promise_fixpoint(const Version& v, const Effects& fx);

// ---------------------------------------------------------------- escape

enum class EnvEscape : uint8_t { NoEscape, StubEligible, Escapes };

const char* env_escape_name(EnvEscape e);

std::map<Reg, EnvEscape> escape_analysis(const Version& v, const Effects& fx);

/// Stable text table of the analysis results (`--dump-analysis`).
std::string dump_analysis(const Version& v, const Function* fn);

}  // namespace pir
