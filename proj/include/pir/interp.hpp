#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pir/ir.hpp"

namespace pir {

enum class ErrorKind {
    UnboundVariable,
    NotAFunction,
    MissingArgumentUsed,
    ArityMismatch,
    TypeError,
    OutOfRange,
    PromiseRecursion,
    StepLimit,
    StackOverflow,
};

const char* error_kind_name(ErrorKind k);

struct Counters {
    uint64_t envs_created = 0;
    uint64_t stub_envs_created = 0;
    uint64_t stubs_materialized = 0;
    uint64_t promises_created = 0;
    uint64_t promises_forced = 0;
    uint64_t deopts_taken = 0;
    uint64_t calls = 0;
};

struct EnvObj;
struct PromiseObj;
struct ClosureObj;

struct Value {
    enum class Kind : uint8_t { Missing, Vec, Closure, Builtin, Promise, Env };
    Kind kind = Kind::Missing;
    std::shared_ptr<const Vec> vec;
    ClosureObj* closure = nullptr;
    PromiseObj* promise = nullptr;
    EnvObj* env = nullptr;
    mr::BuiltinId builtin = mr::BuiltinId::C;

    static Value of(Vec v);
    static Value of(std::shared_ptr<const Vec> v);
    static Value of_env(EnvObj* e);
    static Value of_closure(ClosureObj* c);
    static Value of_promise(PromiseObj* p);
    static Value of_builtin(mr::BuiltinId b);

    bool is_promise() const { return kind == Kind::Promise; }
    bool is_function() const { return kind == Kind::Closure || kind == Kind::Builtin; }
};

struct Binding {
    std::string name;
    Value value;
    const Code* writer_code = nullptr;  // for soundness instrumentation
    int writer_loc = -1;
};

struct EnvObj {
    int id = 0;
    std::vector<Binding> bindings;
    EnvObj* parent = nullptr;
    bool stub = false;
    bool materialized = false;
    std::string label;

    Binding* find(const std::string& name);
};

struct PromiseObj {
    const Function* fn = nullptr;
    const Version* version = nullptr;
    const Promise* code = nullptr;
    EnvObj* env = nullptr;
    bool has_memo = false;
    bool forcing = false;
    Value memo;
};

struct ClosureObj {
    const Function* fn = nullptr;
    EnvObj* env = nullptr;
};

/// Text used by `run` and the trace: "[42]", "<closure f>", "<environment g>".
std::string format_value(const Value& v);

/// Instrumentation points used by the property tests.
class InterpHooks {
  public:
    virtual ~InterpHooks() = default;
    /// A LdVar whose env operand is a register was executed. `found` tells
    /// whether the variable was bound in that env itself (not a parent).
    virtual void on_load(const Code& code, int loc, const EnvObj& env, const std::string& var, const Binding* found) {
        (void)code, (void)loc, (void)env, (void)var, (void)found;
    }
    /// A Force instruction was executed on a promise.
    virtual void on_force(const Code& code, int loc, const PromiseObj& p, bool first) {
        (void)code, (void)loc, (void)p, (void)first;
    }
};

enum class VersionSelector { Baseline, Optimized };

struct RunOptions {
    VersionSelector selector = VersionSelector::Baseline;
    uint64_t step_limit = 20'000'000;
    int depth_limit = 150;
    InterpHooks* hooks = nullptr;
    /// Tag env bindings with their writer so hooks can check store locations.
    bool track_writers = false;
    /// At every checkpoint crossed in baseline code, drop all registers that
    /// the checkpoint does not record (checks the live sets are sufficient).
    bool checkpoint_roundtrip = false;
};

struct RunResult {
    bool ok = false;
    std::string value;            // formatted result when ok
    ErrorKind error = ErrorKind::TypeError;
    std::string message;
    Counters counters;
    std::vector<std::string> trace;

    std::string outcome() const { return ok ? value : std::string("error: ") + error_kind_name(error); }
};

RunResult run(const Program& program, const RunOptions& options = {});

/// Result of a Binop on constants, or nullopt when it would raise an error.
std::optional<Vec> fold_binop(BinopKind k, const Vec& a, const Vec& b);
/// Truthiness of a constant condition, or nullopt when it would raise an error.
std::optional<bool> fold_truthy(const Vec& c);

}  // namespace pir
