#include <algorithm>

#include "pir/analysis.hpp"
#include "pir/interp.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

const Instr* def_of(const Code& c, const std::map<Reg, Loc>& defs, const Operand& a) {
    if (!a.is_reg()) return nullptr;
    auto it = defs.find(a.reg);
    if (it == defs.end()) return nullptr;
    return &c.blocks[it->second.block].instrs[it->second.index];
}

void make_const(Instr& in, Vec v) {
    Instr k(Op::LdConst);
    k.dst = in.dst;
    k.origin = in.origin;
    k.constant = std::move(v);
    in = std::move(k);
}

void drop_phi_inputs(Code& c, BlockId target, BlockId pred) {
    int ti = c.index_of(target);
    if (ti < 0) return;
    for (auto& in : c.blocks[ti].instrs) {
        if (in.op != Op::Phi) break;
        for (size_t k = 0; k < in.targets.size(); ++k)
            if (in.targets[k] == pred) {
                in.targets.erase(in.targets.begin() + k);
                in.args.erase(in.args.begin() + k);
                break;
            }
    }
}

bool fold_constants(Version& v) {
    bool changed = false;
    Code& c = v.body;
    auto defs = definitions(c);
    for (auto& b : c.blocks) {
        for (auto& in : b.instrs) {
            if (in.op == Op::Binop) {
                const Instr* x = def_of(c, defs, in.args[0]);
                const Instr* y = def_of(c, defs, in.args[1]);
                if (!x || !y || x->op != Op::LdConst || y->op != Op::LdConst) continue;
                if (auto r = fold_binop(in.binop, x->constant, y->constant)) {
                    make_const(in, std::move(*r));
                    changed = true;
                }
            }
        }
        Instr& t = b.instrs.back();
        if (t.op == Op::Branch && t.args.size() == 1) {
            const Instr* k = def_of(c, defs, t.args[0]);
            if (!k || k->op != Op::LdConst) continue;
            auto truth = fold_truthy(k->constant);
            if (!truth) continue;
            BlockId keep = t.targets[*truth ? 0 : 1];
            BlockId drop = t.targets[*truth ? 1 : 0];
            t.args.clear();
            t.targets = {keep};
            if (drop != keep) drop_phi_inputs(c, drop, b.id);
            changed = true;
        }
    }
    return changed;
}

bool demote_constant_promises(Version& v) {
    bool changed = false;
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs) {
            if (in.op != Op::MkArg) continue;
            const Promise* p = v.promise(in.name);
            if (!p || p->code.blocks.size() != 1) continue;
            const auto& is = p->code.blocks[0].instrs;
            if (is.size() != 2 || is[0].op != Op::LdConst || is[1].op != Op::Return ||
                !is[1].args[0].is(is[0].dst))
                continue;
            make_const(in, is[0].constant);
            changed = true;
        }
    return changed;
}

bool simplify_effects(const PassContext& ctx, Version& v) {
    Effects fx = compute_effects(v, &ctx.fn);
    bool changed = false;
    std::vector<std::tuple<Reg, Operand, Reg>> repls;
    std::vector<Pos> dels;
    for (auto& b : v.body.blocks)
        for (size_t i = 0; i < b.instrs.size(); ++i) {
            Instr& in = b.instrs[i];
            if (in.op == Op::Force && in.args[0].is_reg() && fx.of(in.args[0]) == MayPromise::None) {
                repls.push_back({in.dst, in.args[0], in.origin});
                dels.push_back({b.id, static_cast<int>(i)});
            } else if (in.op == Op::IsMaterialized && in.env.is_reg() && fx.tracked.count(in.env.reg) &&
                       (!fx.stubs.count(in.env.reg) || !fx.exposed.count(in.env.reg))) {
                make_const(in, Vec::logical(false));
                changed = true;
            }
        }
    if (!dels.empty()) changed = true;
    erase_positions(v.body, dels);
    std::map<Reg, Operand> sub;
    for (auto& [dst, op0, origin] : repls) {
        Operand op = op0;
        while (op.is_reg() && sub.count(op.reg)) op = sub.at(op.reg);
        v.replace_all_uses(dst, op, origin);
        sub[dst] = op;
    }
    return changed;
}

bool simplify_phis(Version& v) {
    bool changed = false;
    for (bool again = true; again;) {
        again = false;
        for (auto& b : v.body.blocks)
            for (size_t i = 0; i < b.instrs.size() && b.instrs[i].op == Op::Phi; ++i) {
                Instr& phi = b.instrs[i];
                std::optional<Operand> same;
                bool unique = true;
                for (auto& a : phi.args) {
                    if (a.is(phi.dst)) continue;
                    if (same && *same != a) unique = false;
                    same = a;
                }
                if (!unique || !same) continue;
                Reg dst = phi.dst, origin = phi.origin;
                Operand op = *same;
                b.instrs.erase(b.instrs.begin() + i);
                v.replace_all_uses(dst, op, origin);
                again = changed = true;
                break;
            }
    }
    return changed;
}

bool same_value(const Instr& a, const Instr& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
        case Op::LdConst: return a.constant == b.constant;
        case Op::LdArg: return a.index == b.index;
        case Op::Binop: return a.binop == b.binop && a.args == b.args;
        case Op::Phi: return a.targets == b.targets && a.args == b.args;
        default: return false;
    }
}

bool value_number(Version& v) {
    Code& c = v.body;
    DomInfo dom = compute_dominators(c);
    std::map<Op, std::vector<Loc>> seen;
    std::vector<std::tuple<Reg, Reg, Reg>> repls;  // dst, with, origin
    std::vector<Pos> dels;
    for (int bi : dom.rpo) {
        auto& instrs = c.blocks[bi].instrs;
        for (size_t i = 0; i < instrs.size(); ++i) {
            const Instr& in = instrs[i];
            if (in.op != Op::LdConst && in.op != Op::LdArg && in.op != Op::Binop && in.op != Op::Phi) continue;
            Loc here{bi, static_cast<int>(i)};
            bool replaced = false;
            for (const Loc& l : seen[in.op]) {
                const Instr& prev = c.blocks[l.block].instrs[l.index];
                if (same_value(prev, in) && dominates(dom, l, here)) {
                    repls.push_back({in.dst, prev.dst, in.origin});
                    dels.push_back({c.blocks[bi].id, static_cast<int>(i)});
                    replaced = true;
                    break;
                }
            }
            if (!replaced) seen[in.op].push_back(here);
        }
    }
    if (repls.empty()) return false;
    // Binop keys compare operands, so apply in order and chain substitutions.
    erase_positions(c, dels);
    std::map<Reg, Reg> sub;
    for (auto& [dst, with, origin] : repls) {
        Reg w = with;
        while (sub.count(w)) w = sub.at(w);
        v.replace_all_uses(dst, Operand::of(w), origin);
        sub[dst] = w;
    }
    return true;
}

bool adce(const PassContext& ctx, Version& v) {
    Code& c = v.body;
    Effects fx = compute_effects(v, &ctx.fn);
    auto defs = definitions(c);
    std::set<Reg> live;
    std::set<std::pair<int, int>> live_instr;
    std::map<Reg, std::vector<Loc>> stores;  // tracked env -> StVars
    std::vector<Loc> work;

    auto is_root = [&](const Instr& in) {
        if (in.is_terminator()) return true;
        switch (in.op) {
            case Op::Call:
            case Op::LdVar:
            case Op::Binop:
                return true;
            case Op::Force:
                return fx.of(in.args[0]) != MayPromise::None;
            case Op::LdFun:
                return !(in.env.is_global() && ctx.prog.stable_globals.count(in.name));
            case Op::StVar:
                return !(in.env.is_reg() && fx.tracked.count(in.env.reg));
            case Op::MkEnv:
                // Reflective builtins reach the frame env through the call stack.
                return in.dst == fx.frame_env && fx.any_code_running;
            default:
                return false;
        }
    };
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            const Instr& in = c.blocks[b].instrs[i];
            Loc l{static_cast<int>(b), static_cast<int>(i)};
            if (in.op == Op::StVar && in.env.is_reg() && fx.tracked.count(in.env.reg))
                stores[in.env.reg].push_back(l);
            if (is_root(in)) work.push_back(l);
        }
    auto mark = [&](Loc l) {
        if (live_instr.insert({l.block, l.index}).second) work.push_back(l);
    };
    std::vector<Loc> pending = std::move(work);
    work.clear();
    for (auto& l : pending) mark(l);
    while (!work.empty()) {
        Loc l = work.back();
        work.pop_back();
        const Instr& in = c.blocks[l.block].instrs[l.index];
        if (in.dst != kNoReg && live.insert(in.dst).second && in.op == Op::MkEnv) {
            auto it = stores.find(in.dst);
            if (it != stores.end())
                for (auto& s : it->second) mark(s);
        }
        auto use = [&](const Operand& a) {
            if (!a.is_reg()) return;
            auto d = defs.find(a.reg);
            if (d != defs.end()) mark(d->second);
        };
        for (auto& a : in.args) use(a);
        if (in.has_env() && in.op != Op::Force && in.op != Op::Binop) use(in.env);
    }

    std::vector<Pos> dels;
    std::set<Reg> dead_envs;
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            if (live_instr.count({static_cast<int>(b), static_cast<int>(i)})) continue;
            const Instr& in = c.blocks[b].instrs[i];
            if (in.op == Op::MkEnv) dead_envs.insert(in.dst);
            dels.push_back({c.blocks[b].id, static_cast<int>(i)});
        }
    if (dels.empty()) return false;
    auto nearest_live = [&](Operand e) {
        std::set<Reg> seen;
        while (e.is_reg() && dead_envs.count(e.reg) && seen.insert(e.reg).second) e = fx.parent.at(e.reg);
        return e;
    };
    for (auto& b : c.blocks)
        for (auto& in : b.instrs)
            if ((in.op == Op::Force || in.op == Op::Binop) && in.env.is_reg() && dead_envs.count(in.env.reg))
                in.env = nearest_live(in.env);
    for (auto& p : v.promises)
        if (p.env.is_reg() && dead_envs.count(p.env.reg)) p.env = nearest_live(p.env);
    erase_positions(c, dels);
    return true;
}

bool thread_jumps(Code& c) {
    bool changed = false;
    for (size_t bi = 1; bi < c.blocks.size(); ++bi) {
        const BasicBlock& b = c.blocks[bi];
        if (b.instrs.size() != 1 || b.instrs[0].op != Op::Branch || b.instrs[0].targets.size() != 1) continue;
        BlockId self = b.id, dest = b.instrs[0].targets[0];
        if (dest == self) continue;
        Cfg cfg(c);
        int di = c.index_of(dest);
        for (int p : cfg.preds[bi]) {
            Instr& t = c.blocks[p].instrs.back();
            if (std::find(t.targets.begin(), t.targets.end(), dest) != t.targets.end()) continue;
            BlockId pid = c.blocks[p].id;
            for (auto& tg : t.targets)
                if (tg == self) tg = dest;
            for (auto& in : c.blocks[di].instrs) {
                if (in.op != Op::Phi) break;
                for (size_t k = 0; k < in.targets.size(); ++k)
                    if (in.targets[k] == self) {
                        in.targets.push_back(pid);
                        in.args.push_back(in.args[k]);
                        break;
                    }
            }
            changed = true;
        }
    }
    return changed;
}

bool merge_blocks(Version& v) {
    Code& c = v.body;
    bool changed = false;
    for (bool again = true; again;) {
        again = false;
        Cfg cfg(c);
        for (size_t a = 0; a < c.blocks.size() && !again; ++a) {
            Instr& t = c.blocks[a].instrs.back();
            if (t.op != Op::Branch || t.targets.size() != 1) continue;
            int bi = c.index_of(t.targets[0]);
            if (bi <= 0 || bi == static_cast<int>(a) || cfg.preds[bi].size() != 1) continue;
            BlockId bid = c.blocks[bi].id, aid = c.blocks[a].id;
            std::vector<Instr> moved = std::move(c.blocks[bi].instrs);
            c.blocks.erase(c.blocks.begin() + bi);
            int ai = c.index_of(aid);
            c.blocks[ai].instrs.pop_back();
            std::vector<std::pair<Reg, std::pair<Operand, Reg>>> phis;
            for (auto& in : moved) {
                if (in.op == Op::Phi) {
                    phis.push_back({in.dst, {in.args.at(0), in.origin}});
                    continue;
                }
                c.blocks[ai].instrs.push_back(std::move(in));
            }
            retarget_phis(c, ai, bid, aid);
            for (auto& [dst, p] : phis) v.replace_all_uses(dst, p.first, p.second);
            again = changed = true;
        }
    }
    return changed;
}

}  // namespace

bool cleanup(const PassContext& ctx, Version& v) {
    bool changed = false;
    for (int round = 0; round < 20; ++round) {
        bool c = false;
        c |= fold_constants(v);
        c |= demote_constant_promises(v);
        c |= simplify_effects(ctx, v);
        c |= remove_unreachable(v.body);
        c |= simplify_phis(v);
        c |= value_number(v);
        c |= adce(ctx, v);
        c |= thread_jumps(v.body);
        c |= remove_unreachable(v.body);
        c |= merge_blocks(v);
        c |= prune_promises(v);
        if (!c) break;
        changed = true;
    }
    return changed;
}

}  // namespace pir
