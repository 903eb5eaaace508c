#include "pir/ir.hpp"

#include <cmath>
#include <stdexcept>

namespace pir {

bool Vec::operator==(const Vec& o) const {
    if (type != o.type || str != o.str || num.size() != o.num.size()) return false;
    for (size_t i = 0; i < num.size(); ++i) {
        if (num[i] == o.num[i]) continue;
        if (std::isnan(num[i]) && std::isnan(o.num[i])) continue;
        return false;
    }
    return true;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string element(const Vec& v, size_t i) {
    switch (v.type) {
        case Vec::Type::Logical: return v.num[i] != 0 ? "TRUE" : "FALSE";
        case Vec::Type::Numeric: return mr::format_double(v.num[i]);
        case Vec::Type::String: return quote(v.str[i]);
        case Vec::Type::Null: break;
    }
    return "";
}

}  // namespace

std::string format_vec_ir(const Vec& v) {
    if (v.type == Vec::Type::Null) return "NULL";
    std::string out = "[" + std::to_string(v.size()) + "]";
    if (v.size() == 0) out += v.type == Vec::Type::Logical ? " logical" : v.type == Vec::Type::String ? " character" : " numeric";
    for (size_t i = 0; i < v.size(); ++i) out += " " + element(v, i);
    return out;
}

std::string format_vec_value(const Vec& v) {
    if (v.type == Vec::Type::Null) return "NULL";
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + element(v, i);
    return out + "]";
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Binop: return "Binop";
        case Op::Branch: return "Branch";
        case Op::Call: return "Call";
        case Op::Deopt: return "Deopt";
        case Op::Force: return "Force";
        case Op::LdArg: return "LdArg";
        case Op::LdConst: return "LdConst";
        case Op::LdFun: return "LdFun";
        case Op::LdVar: return "LdVar";
        case Op::MkArg: return "MkArg";
        case Op::MkEnv: return "MkEnv";
        case Op::MkClosure: return "MkClosure";
        case Op::Phi: return "Phi";
        case Op::Return: return "Return";
        case Op::StVar: return "StVar";
        case Op::IsMaterialized: return "IsMaterialized";
    }
    return "?";
}

const char* assumption_name(Assumption a) {
    return a == Assumption::EagerArgs ? "EagerArgs" : "NoReflectiveWrite";
}

bool Instr::has_env() const {
    switch (op) {
        case Op::Binop:
        case Op::Call:
        case Op::Deopt:
        case Op::Force:
        case Op::LdFun:
        case Op::LdVar:
        case Op::MkArg:
        case Op::MkEnv:
        case Op::MkClosure:
        case Op::StVar:
        case Op::IsMaterialized:
            return true;
        default:
            return false;
    }
}

bool Instr::operator==(const Instr& o) const {
    if (op != o.op || dst != o.dst || args != o.args || name != o.name || names != o.names || targets != o.targets ||
        deopt_regs != o.deopt_regs || index != o.index || stub != o.stub)
        return false;
    if (has_env() && env != o.env) return false;
    if (op == Op::LdConst && !(constant == o.constant)) return false;
    if (op == Op::Binop && binop != o.binop) return false;
    return true;
}

std::vector<BlockId> successors(const BasicBlock& b) {
    if (b.instrs.empty()) return {};
    const Instr& t = b.instrs.back();
    if (t.op == Op::Branch) return t.targets;
    return {};
}

int Code::index_of(BlockId id) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].id == id) return static_cast<int>(i);
    return -1;
}

BasicBlock& Code::block(BlockId id) {
    int i = index_of(id);
    if (i < 0) throw std::out_of_range("no block BB" + std::to_string(id));
    return blocks[i];
}

const BasicBlock& Code::block(BlockId id) const {
    int i = index_of(id);
    if (i < 0) throw std::out_of_range("no block BB" + std::to_string(id));
    return blocks[i];
}

size_t Code::instr_count() const {
    size_t n = 0;
    for (auto& b : blocks) n += b.instrs.size();
    return n;
}

void Code::replace_uses(Reg old, Operand repl) {
    for (auto& b : blocks)
        for (auto& in : b.instrs)
            in.for_each_operand([&](Operand& a) {
                if (a.is(old)) a = repl;
            });
}

int Code::use_count(Reg r) const {
    int n = 0;
    for (auto& b : blocks)
        for (auto& in : b.instrs)
            in.for_each_operand([&](const Operand& a) { n += a.is(r); });
    return n;
}

const Promise* Version::promise(const std::string& id) const {
    for (auto& p : promises)
        if (p.id == id) return &p;
    return nullptr;
}

Promise* Version::promise(const std::string& id) {
    for (auto& p : promises)
        if (p.id == id) return &p;
    return nullptr;
}

void Version::renumber_counters() {
    Reg r = -1;
    BlockId b = -1;
    auto scan = [&](const Code& c) {
        for (auto& bb : c.blocks) {
            b = std::max(b, bb.id);
            for (auto& in : bb.instrs) {
                r = std::max(r, in.dst);
                in.for_each_operand([&](const Operand& a) {
                    if (a.is_reg()) r = std::max(r, a.reg);
                });
            }
        }
    };
    scan(body);
    for (auto& p : promises) {
        scan(p.code);
        if (p.env.is_reg()) r = std::max(r, p.env.reg);
    }
    next_reg = std::max(next_reg, r + 1);
    next_block = std::max(next_block, b + 1);
}

void Version::replace_all_uses(Reg old, Operand repl, Reg origin) {
    body.replace_uses(old, repl);
    for (auto& p : promises) {
        p.code.replace_uses(old, repl);
        if (p.env.is(old)) p.env = repl;
    }
    for (auto& [k, v] : carriers)
        if (v.is(old)) v = repl;
    if (origin != kNoReg) carriers[origin] = repl;
}

const Checkpoint* Function::checkpoint(int id) const {
    for (auto& c : checkpoints)
        if (c.id == id) return &c;
    return nullptr;
}

const Checkpoint* Function::checkpoint_after(Reg r) const {
    for (auto& c : checkpoints)
        if (c.after == r && r != kNoReg) return &c;
    return nullptr;
}

Locations::Locations(const Code& c) {
    int n = 0;
    for (auto& b : c.blocks) {
        block_start.push_back(n);
        n += static_cast<int>(b.instrs.size());
    }
}

}  // namespace pir
