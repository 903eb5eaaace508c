#pragma once

#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "pir/interp.hpp"

namespace pir {

/// Runtime error raised by the program; unwinds to `run`.
struct RError {
    ErrorKind kind;
    std::string message;
};

struct Frame {
    const Function* fn = nullptr;
    EnvObj* env = nullptr;       // set once the function's frame env exists
    EnvObj* call_env = nullptr;  // env the call was evaluated in
};

struct Activation {
    const Function* fn;
    const Version* version;
    const Code* code;
    const std::vector<Value>* args;  // nullptr for promise code
    ClosureObj* closure;             // nullptr for promise code and main
    int frame;
};

struct CodeInfo {
    std::unordered_map<BlockId, int> index;
    std::vector<int> start;  // flat offset per block index
};

class Machine {
  public:
    Machine(const Program& p, const RunOptions& o);
    RunResult run();

    // Used by builtins.
    Value call_builtin(mr::BuiltinId id, std::vector<Value>& args, EnvObj* eval_env);

  private:
    const Program& prog_;
    RunOptions opt_;
    Counters counters_;
    std::vector<std::string> trace_;
    std::deque<EnvObj> envs_;
    std::deque<PromiseObj> promises_;
    std::deque<ClosureObj> closures_;
    std::vector<Frame> frames_;
    std::unordered_map<const Code*, CodeInfo> info_;
    EnvObj* global_ = nullptr;
    uint64_t steps_ = 0;
    int depth_ = 0;

    const CodeInfo& info(const Code& c);
    EnvObj* new_env(EnvObj* parent, bool stub, const std::string& label);
    void materialize(EnvObj* e);

    Value exec(const Activation& act, std::vector<Value>& regs, int block, int index);
    Value call(const Value& fun, std::vector<Value>& args, EnvObj* eval_env);
    Value force(const Value& v);
    Value ldfun(const std::string& name, EnvObj* env);

    EnvObj* env_of(const Value& v, const char* what);
    int current_frame() const { return static_cast<int>(frames_.size()) - 1; }
    void trace_builtin(const std::string& name, const std::vector<Value>& args, const Value& result);

    friend struct BuiltinImpl;
};

[[noreturn]] inline void raise(ErrorKind k, std::string msg) { throw RError{k, std::move(msg)}; }

Value binop(BinopKind k, const Value& a, const Value& b);
bool truthy(const Value& v);

}  // namespace pir
