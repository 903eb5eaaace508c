#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pir/frontend.hpp"

namespace pir {

using mr::BinopKind;

using Reg = int;
inline constexpr Reg kNoReg = -1;
using BlockId = int;

struct Operand {
    enum class Kind : uint8_t { Reg, Global, Open, Missing };
    Kind kind = Kind::Missing;
    Reg reg = kNoReg;

    static Operand of(Reg r) { return {Kind::Reg, r}; }
    static Operand global() { return {Kind::Global, kNoReg}; }
    static Operand open() { return {Kind::Open, kNoReg}; }
    static Operand missing() { return {Kind::Missing, kNoReg}; }

    bool is_reg() const { return kind == Kind::Reg; }
    bool is(Reg r) const { return kind == Kind::Reg && reg == r; }
    bool is_global() const { return kind == Kind::Global; }
    bool is_open() const { return kind == Kind::Open; }
    bool is_missing() const { return kind == Kind::Missing; }

    friend bool operator==(const Operand&, const Operand&) = default;
    friend auto operator<=>(const Operand&, const Operand&) = default;
};

/// Constant vectors (LdConst payloads); also reused as runtime vectors.
struct Vec {
    enum class Type : uint8_t { Null, Logical, Numeric, String };
    Type type = Type::Null;
    std::vector<double> num;  // Logical elements stored as 0/1
    std::vector<std::string> str;

    static Vec null() { return {}; }
    static Vec number(double d) { return {Type::Numeric, {d}, {}}; }
    static Vec logical(bool b) { return {Type::Logical, {b ? 1.0 : 0.0}, {}}; }
    static Vec string(std::string s) { return {Type::String, {}, {std::move(s)}}; }

    size_t size() const { return type == Type::String ? str.size() : num.size(); }
    bool operator==(const Vec& o) const;
};

/// Prints "[1] 42", "[2] 4 5", "[1] TRUE", "[1] \"s\"", "NULL".
std::string format_vec_ir(const Vec& v);
/// Prints "[42]", "[4,5]", "[TRUE]", "[\"s\"]", "NULL" (run output).
std::string format_vec_value(const Vec& v);

enum class Op : uint8_t {
    Binop, Branch, Call, Deopt, Force, LdArg, LdConst, LdFun, LdVar,
    MkArg, MkEnv, MkClosure, Phi, Return, StVar, IsMaterialized
};

const char* op_name(Op op);

enum class Assumption : uint8_t { EagerArgs, NoReflectiveWrite };

const char* assumption_name(Assumption a);

/// Operand layout per opcode:
///   Binop      args=[a, b]            env=dep   binop
///   Branch     args=[] or [cond]      targets=[L] or [L1, L2]
///   Call       args=[callee, a...]    env=dep
///   Deopt      args=values            deopt_regs=baseline regs  env=frame env  index=checkpoint
///   Force      args=[a]               env=dep
///   LdArg      index
///   LdConst    constant
///   LdFun      name                   env
///   LdVar      name                   env
///   MkArg      name=promise id        env
///   MkEnv      names, args=values     env=parent  stub
///   MkClosure  name=function id       env
///   Phi        args=inputs            targets=predecessor labels
///   Return     args=[a]
///   StVar      name, args=[value]     env
///   IsMaterialized                    env
struct Instr {
    Op op;
    Reg dst = kNoReg;
    std::vector<Operand> args;
    Operand env = Operand::missing();
    std::string name;
    std::vector<std::string> names;
    std::vector<BlockId> targets;
    std::vector<Reg> deopt_regs;
    Vec constant;
    BinopKind binop = BinopKind::Add;
    int index = 0;
    bool stub = false;
    /// Baseline register this instruction descends from (kNoReg when none).
    /// Not printed and ignored by equality.
    Reg origin = kNoReg;

    explicit Instr(Op o) : op(o) {}

    bool is_terminator() const { return op == Op::Branch || op == Op::Return || op == Op::Deopt; }
    bool has_env() const;
    bool operator==(const Instr& o) const;

    template <class F>
    void for_each_operand(F&& f) {
        for (auto& a : args) f(a);
        if (has_env()) f(env);
    }
    template <class F>
    void for_each_operand(F&& f) const {
        for (auto& a : args) f(a);
        if (has_env()) f(env);
    }
};

struct BasicBlock {
    BlockId id = 0;
    std::vector<Instr> instrs;

    const Instr& terminator() const { return instrs.back(); }
    Instr& terminator() { return instrs.back(); }
    bool operator==(const BasicBlock&) const = default;
};

std::vector<BlockId> successors(const BasicBlock& b);

struct Code {
    std::vector<BasicBlock> blocks;  // entry is first

    int index_of(BlockId id) const;  // -1 if absent
    BasicBlock& block(BlockId id);
    const BasicBlock& block(BlockId id) const;
    size_t instr_count() const;
    bool operator==(const Code&) const = default;

    /// Rewrites every use of `old` (not definitions).
    void replace_uses(Reg old, Operand repl);
    /// Number of operand occurrences of `r`.
    int use_count(Reg r) const;
};

struct Promise {
    std::string id;
    Operand env;  // register bound to the creating env while the body runs, or G
    Code code;
    bool operator==(const Promise&) const = default;
};

struct Version {
    std::set<Assumption> assumptions;
    Code body;
    std::vector<Promise> promises;
    /// Baseline register -> operand currently carrying its value, for
    /// values whose defining instruction was replaced. Not printed.
    std::map<Reg, Operand> carriers;
    Reg next_reg = 0;
    BlockId next_block = 0;

    const Promise* promise(const std::string& id) const;
    Promise* promise(const std::string& id);
    bool has(Assumption a) const { return assumptions.count(a) != 0; }

    Reg fresh_register() { return next_reg++; }
    BlockId fresh_block() { return next_block++; }
    /// Recomputes next_reg / next_block from the code.
    void renumber_counters();

    /// Rewrites uses of `old` in the body and all promises and keeps the
    /// carrier map in sync. `origin` is the replaced instruction's origin.
    void replace_all_uses(Reg old, Operand repl, Reg origin = kNoReg);

    bool operator==(const Version& o) const {
        return assumptions == o.assumptions && body == o.body && promises == o.promises;
    }
};

struct Checkpoint {
    int id = 0;
    BlockId block = 0;
    int index = 0;          // resume before this instruction
    Reg after = kNoReg;     // effect register preceding the resume point (kNoReg at entry)
    std::vector<Reg> live;  // baseline registers live at the resume point
};

struct Function {
    std::string id;
    std::vector<std::string> params;
    bool nested = false;         // defined inside another function: parent env is O
    bool top_level = false;      // the synthetic program body
    Reg entry_env = kNoReg;      // baseline register of the frame env
    std::vector<Version> versions;
    std::vector<Checkpoint> checkpoints;

    int param_count() const { return static_cast<int>(params.size()); }
    const Version& baseline() const { return versions.front(); }
    const Checkpoint* checkpoint(int id) const;
    const Checkpoint* checkpoint_after(Reg r) const;
};

struct Program {
    std::map<std::string, Function> functions;
    std::string entry;
    std::vector<std::string> order;  // definition order
    /// Globals bound exactly once, to a closure, by top-level code, and never
    /// touched reflectively; maps name -> function id.
    std::map<std::string, std::string> stable_globals;

    Function& fn(const std::string& id) { return functions.at(id); }
    const Function& fn(const std::string& id) const { return functions.at(id); }
};

/// Flat location numbering: instruction index in block order.
struct Locations {
    std::vector<int> block_start;  // by block index
    explicit Locations(const Code& c);
    int at(int block_index, int instr_index) const { return block_start[block_index] + instr_index; }
};

}  // namespace pir
