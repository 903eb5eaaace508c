#include "pir/verify.hpp"

#include <map>

#include "pir/cfg.hpp"
#include "pir/text.hpp"

namespace pir {

namespace {

struct Def {
    int block;
    int index;
    bool env;
};

class Verifier {
  public:
    Verifier(const Version& v, const VerifyContext& ctx) : v_(v), ctx_(ctx) {}

    std::vector<std::string> run() {
        check_code(v_.body, "body", nullptr);
        std::set<std::string> ids;
        for (auto& p : v_.promises) {
            if (!ids.insert(p.id).second) err("body", "duplicate promise id " + p.id);
            check_code(p.code, "promise " + p.id, &p);
        }
        return std::move(out_);
    }

  private:
    const Version& v_;
    const VerifyContext& ctx_;
    std::vector<std::string> out_;
    std::set<Reg> body_envs_;

    void err(const std::string& where, const std::string& msg) { out_.push_back(where + ": " + msg); }

    void check_code(const Code& c, const std::string& where, const Promise* prom) {
        if (c.blocks.empty()) {
            err(where, "code has no blocks");
            return;
        }
        std::set<BlockId> labels;
        for (auto& b : c.blocks)
            if (!labels.insert(b.id).second) err(where, "duplicate label BB" + std::to_string(b.id));

        std::map<Reg, Def> defs;
        for (size_t bi = 0; bi < c.blocks.size(); ++bi) {
            auto& b = c.blocks[bi];
            std::string bw = where + " BB" + std::to_string(b.id);
            if (b.instrs.empty()) {
                err(bw, "empty block");
                continue;
            }
            bool seen_non_phi = false;
            for (size_t ii = 0; ii < b.instrs.size(); ++ii) {
                const Instr& in = b.instrs[ii];
                bool last = ii + 1 == b.instrs.size();
                if (in.is_terminator() && !last) err(bw, "terminator mid-block");
                if (last && !in.is_terminator()) err(bw, "block does not end in a terminator");
                if (in.op == Op::Phi && seen_non_phi) err(bw, "Phi not at block head");
                if (in.op != Op::Phi) seen_non_phi = true;
                if (in.dst != kNoReg) {
                    if (defs.count(in.dst) || (prom && prom->env.is(in.dst)))
                        err(bw, "register " + std::to_string(in.dst) + " defined more than once");
                    defs[in.dst] = Def{static_cast<int>(bi), static_cast<int>(ii), in.op == Op::MkEnv};
                    if (in.op == Op::MkEnv && !prom) body_envs_.insert(in.dst);
                }
                if (in.op == Op::Branch) {
                    for (BlockId t : in.targets)
                        if (!labels.count(t)) err(bw, "branch to unknown label BB" + std::to_string(t));
                    if (in.targets.size() == 2 && in.targets[0] == in.targets[1])
                        err(bw, "conditional branch with identical targets");
                    if (in.targets.size() != in.args.size() + 1) err(bw, "malformed Branch");
                }
            }
        }

        DomInfo dom = compute_dominators(c);
        Cfg g(c);
        for (size_t bi = 0; bi < c.blocks.size(); ++bi)
            if (!dom.reachable[bi]) err(where, "unreachable block BB" + std::to_string(c.blocks[bi].id));

        auto is_env_reg = [&](Reg r) {
            auto it = defs.find(r);
            if (it != defs.end()) return it->second.env;
            return prom && prom->env.is(r);
        };

        for (size_t bi = 0; bi < c.blocks.size(); ++bi) {
            auto& b = c.blocks[bi];
            std::string bw = where + " BB" + std::to_string(b.id);
            for (size_t ii = 0; ii < b.instrs.size(); ++ii) {
                const Instr& in = b.instrs[ii];
                auto check_use = [&](const Operand& a, Loc at, bool env_pos) {
                    if (a.is_open() && !ctx_.allow_open) err(bw, "O used outside inner-function code");
                    if (env_pos) {
                        if (a.is_missing()) err(bw, std::string(op_name(in.op)) + " has no environment operand");
                        if (a.is_reg() && !is_env_reg(a.reg))
                            err(bw, std::string(op_name(in.op)) + " environment operand %" +
                                        std::to_string(a.reg) + " is not an environment");
                    } else if (a.is_global() || a.is_open()) {
                        err(bw, std::string(op_name(in.op)) + " uses an environment literal as a value");
                    }
                    if (!a.is_reg()) return;
                    auto it = defs.find(a.reg);
                    if (it == defs.end()) {
                        if (prom && prom->env.is(a.reg)) return;
                        err(bw, "use of undefined register " + std::to_string(a.reg));
                        return;
                    }
                    Loc d{it->second.block, it->second.index};
                    if (at.index < 0) {
                        // Phi input: def must reach the end of the predecessor.
                        if (!(d.block == at.block || dom.dominates_block(d.block, at.block)))
                            err(bw, "phi input %" + std::to_string(a.reg) + " not dominated by def");
                    } else if (!dominates(dom, d, at)) {
                        err(bw, "use of %" + std::to_string(a.reg) + " not dominated by def");
                    }
                };
                Loc here{static_cast<int>(bi), static_cast<int>(ii)};
                switch (in.op) {
                    case Op::Phi: {
                        if (in.args.size() != in.targets.size()) {
                            err(bw, "malformed Phi");
                            break;
                        }
                        std::set<BlockId> want;
                        for (int p : g.preds[bi]) want.insert(c.blocks[p].id);
                        std::set<BlockId> got(in.targets.begin(), in.targets.end());
                        if (got != want || got.size() != in.targets.size())
                            err(bw, "Phi inputs do not match predecessors");
                        for (size_t k = 0; k < in.args.size(); ++k) {
                            int pi = c.index_of(in.targets[k]);
                            if (pi < 0) continue;
                            if (in.args[k].is_global() || in.args[k].is_open())
                                err(bw, "Phi uses an environment literal");
                            check_use(in.args[k], Loc{pi, -1}, false);
                        }
                        break;
                    }
                    case Op::MkEnv:
                        if (in.names.size() != in.args.size()) err(bw, "malformed MkEnv");
                        for (auto& a : in.args) check_use(a, here, false);
                        check_use(in.env, here, true);
                        break;
                    case Op::Deopt:
                        if (in.deopt_regs.size() != in.args.size()) err(bw, "malformed Deopt");
                        if (ctx_.fn && !ctx_.fn->checkpoint(in.index))
                            err(bw, "Deopt to unknown checkpoint cp" + std::to_string(in.index));
                        for (auto& a : in.args) check_use(a, here, false);
                        check_use(in.env, here, true);
                        break;
                    default: {
                        size_t nargs = in.args.size();
                        bool missing_ok = in.op == Op::Return;
                        if (in.op == Op::Call && nargs == 0) err(bw, "Call without callee");
                        if ((in.op == Op::Binop && nargs != 2) ||
                            ((in.op == Op::Force || in.op == Op::Return || in.op == Op::StVar) && nargs != 1))
                            err(bw, std::string("malformed ") + op_name(in.op));
                        for (auto& a : in.args) {
                            if (a.is_missing() && !missing_ok)
                                err(bw, std::string(op_name(in.op)) + " uses the missing marker");
                            check_use(a, here, false);
                        }
                        if (in.has_env()) check_use(in.env, here, true);
                    }
                }
                if (in.op == Op::MkArg && !v_.promise(in.name)) err(bw, "MkArg of unknown promise " + in.name);
                if (in.op == Op::LdArg && (in.index < 0 || (ctx_.param_count >= 0 && in.index >= ctx_.param_count)))
                    err(bw, "LdArg index out of range");
                if (in.op == Op::LdArg && prom) err(bw, "LdArg inside promise code");
            }
        }
    }
};

}  // namespace

std::vector<std::string> verify(const Version& v, const VerifyContext& ctx) { return Verifier(v, ctx).run(); }

std::vector<std::string> verify_function(const Function& f) {
    std::vector<std::string> out;
    VerifyContext ctx;
    ctx.param_count = f.param_count();
    ctx.allow_open = f.nested;
    ctx.fn = &f;
    if (f.versions.empty()) out.push_back(f.id + ": no versions");
    for (size_t i = 0; i < f.versions.size(); ++i) {
        for (auto& e : verify(f.versions[i], ctx)) out.push_back(f.id + " v" + std::to_string(i) + " " + e);
    }
    if (!f.versions.empty() && !f.versions[0].assumptions.empty()) out.push_back(f.id + ": baseline has assumptions");
    return out;
}

std::vector<std::string> verify_program(const Program& p) {
    std::vector<std::string> out;
    if (!p.functions.count(p.entry)) out.push_back("missing entry function");
    for (auto& [id, f] : p.functions) {
        auto e = verify_function(f);
        out.insert(out.end(), e.begin(), e.end());
    }
    return out;
}

}  // namespace pir
