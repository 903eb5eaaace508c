#include <algorithm>

#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

bool uses_env_as_value(const Instr& in, Reg e) {
    for (auto& a : in.args)
        if (a.is(e)) return true;
    return false;
}

template <class F>
void each_body_instr(Code& c, F&& f) {
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i)
            f(c.blocks[b].instrs[i], static_cast<int>(b), static_cast<int>(i));
}

bool same_or_dominates(const DomInfo& dom, Loc a, Loc b) {
    return (a.block == b.block && a.index == b.index) || dominates(dom, a, b);
}

}  // namespace

// ------------------------------------------------------------------ elide

bool elide_environments(const PassContext& ctx, Version& v) {
    Effects fx = compute_effects(v, &ctx.fn);
    auto esc = escape_analysis(v, fx);
    bool changed = false;
    for (auto& [e, kind] : esc) {
        if (kind != EnvEscape::NoEscape) continue;
        bool blocked = false;
        auto check = [&](const Instr& in) {
            if ((in.op == Op::LdVar || in.op == Op::LdFun || in.op == Op::Deopt) && in.env.is(e)) blocked = true;
            if (in.op != Op::StVar && in.op != Op::Force && in.op != Op::Binop && in.op != Op::IsMaterialized &&
                in.op != Op::MkEnv && in.env.is(e))
                blocked = true;
            if (in.op == Op::MkEnv && in.env.is(e)) blocked = true;
            if (uses_env_as_value(in, e)) blocked = true;
        };
        for (auto& b : v.body.blocks)
            for (auto& in : b.instrs) check(in);
        for (auto& p : v.promises) {
            if (p.env.is(e)) blocked = true;
            for (auto& b : p.code.blocks)
                for (auto& in : b.instrs) check(in);
        }
        if (blocked) continue;
        Operand parent = fx.parent.at(e);
        for (auto& b : v.body.blocks) {
            std::erase_if(b.instrs, [&](const Instr& in) {
                return (in.op == Op::StVar && in.env.is(e)) || (in.op == Op::MkEnv && in.dst == e);
            });
            for (auto& in : b.instrs) {
                if ((in.op == Op::Force || in.op == Op::Binop) && in.env.is(e)) in.env = parent;
                if (in.op == Op::IsMaterialized && in.env.is(e)) {
                    Instr k(Op::LdConst);
                    k.dst = in.dst;
                    k.origin = in.origin;
                    k.constant = Vec::logical(false);
                    in = std::move(k);
                }
            }
        }
        changed = true;
    }
    return changed;
}

// ------------------------------------------------------------------ stub

namespace {

struct StubSite {
    int block, index;
};

// Operand carrying baseline register `r` at location `at`, if any.
std::optional<Operand> baseline_value(const Version& v, const DomInfo& dom, const std::map<Reg, Loc>& defs,
                                      Reg r, Loc at) {
    const Code& c = v.body;
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            const Instr& in = c.blocks[b].instrs[i];
            if (in.origin != r || in.dst == kNoReg) continue;
            if (same_or_dominates(dom, Loc{static_cast<int>(b), static_cast<int>(i)}, at)) return Operand::of(in.dst);
        }
    std::set<Reg> seen;
    auto it = v.carriers.find(r);
    while (it != v.carriers.end()) {
        const Operand& op = it->second;
        if (!op.is_reg()) return op.is_missing() ? std::nullopt : std::optional<Operand>(op);
        auto d = defs.find(op.reg);
        if (d != defs.end()) {
            if (same_or_dominates(dom, d->second, at)) return op;
            return std::nullopt;
        }
        if (!seen.insert(op.reg).second) break;
        it = v.carriers.find(op.reg);
    }
    return std::nullopt;
}

}  // namespace

bool speculate_stub_envs(const PassContext& ctx, Version& v) {
    const Function& fn = ctx.fn;
    if (fn.top_level) return false;
    Effects fx = compute_effects(v, &fn);
    Reg e = fx.frame_env;
    if (e == kNoReg || fx.stubs.count(e)) return false;
    auto esc = escape_analysis(v, fx);
    if (esc.at(e) != EnvEscape::StubEligible) return false;

    Code& c = v.body;
    DomInfo dom = compute_dominators(c);
    auto defs = definitions(c);
    Loc mk = defs.at(e);

    struct Plan {
        int block, index;
        int cp;
        std::vector<Operand> args;
        std::vector<Reg> regs;
    };
    std::vector<Plan> plans;
    bool ok = true;
    each_body_instr(c, [&](Instr& in, int b, int i) {
        if (!ok || !fx.code_running(in)) return;
        if (!dominates(dom, mk, Loc{b, i})) {
            ok = false;
            return;
        }
        const Checkpoint* cp = in.origin == kNoReg ? nullptr : fn.checkpoint_after(in.origin);
        if (!cp) {
            ok = false;
            return;
        }
        Plan p{b, i, cp->id, {}, {}};
        for (Reg r : cp->live) {
            auto op = baseline_value(v, dom, defs, r, Loc{b, i});
            if (!op) {
                ok = false;
                return;
            }
            p.args.push_back(*op);
            p.regs.push_back(r);
        }
        plans.push_back(std::move(p));
    });
    if (!ok || plans.empty()) return false;

    std::sort(plans.begin(), plans.end(), [](const Plan& a, const Plan& b) {
        return a.block != b.block ? a.block > b.block : a.index > b.index;
    });
    for (auto& p : plans) {
        int tail = split_block(v, p.block, p.index + 1);
        BlockId tail_id = c.blocks[tail].id;
        BasicBlock deopt;
        deopt.id = v.fresh_block();
        Instr d(Op::Deopt);
        d.index = p.cp;
        d.args = p.args;
        d.deopt_regs = p.regs;
        d.env = Operand::of(e);
        deopt.instrs.push_back(std::move(d));

        Instr g(Op::IsMaterialized);
        g.dst = v.fresh_register();
        g.env = Operand::of(e);
        Instr br(Op::Branch);
        br.args = {Operand::of(g.dst)};
        br.targets = {deopt.id, tail_id};
        c.blocks[p.block].instrs.push_back(std::move(g));
        c.blocks[p.block].instrs.push_back(std::move(br));
        c.blocks.insert(c.blocks.begin() + tail, std::move(deopt));
    }
    for (auto& b : c.blocks)
        for (auto& in : b.instrs)
            if (in.op == Op::MkEnv && in.dst == e) in.stub = true;
    v.assumptions.insert(Assumption::NoReflectiveWrite);
    return true;
}

// ------------------------------------------------------------------ delay

namespace {

bool on_cycle(const Cfg& cfg, int b) {
    std::vector<bool> seen(cfg.succs.size(), false);
    std::vector<int> work(cfg.succs[b].begin(), cfg.succs[b].end());
    while (!work.empty()) {
        int x = work.back();
        work.pop_back();
        if (x == b) return true;
        if (seen[x]) continue;
        seen[x] = true;
        for (int s : cfg.succs[x]) work.push_back(s);
    }
    return false;
}

std::vector<bool> reachable_from(const Cfg& cfg, int b) {
    std::vector<bool> seen(cfg.succs.size(), false);
    std::vector<int> work(cfg.succs[b].begin(), cfg.succs[b].end());
    while (!work.empty()) {
        int x = work.back();
        work.pop_back();
        if (seen[x]) continue;
        seen[x] = true;
        for (int s : cfg.succs[x]) work.push_back(s);
    }
    return seen;
}

int common_dominator(const DomInfo& dom, int a, int b) {
    while (!dom.dominates_block(a, b)) a = dom.idom[a];
    return a;
}

struct Binding {
    std::vector<std::string> names;
    std::vector<Operand> values;
};

// Bindings of env `e` before (bi, ii) according to the scope cells.
std::optional<Binding> bindings_at(const ScopeResult& sr, VarReader& rd, const Locations& locs, Reg e, int bi,
                                   int ii) {
    Binding out;
    int l = locs.at(bi, ii);
    for (auto& x : sr.domain.vars) {
        const AbsCell* cell = sr.cell(l, e, x);
        if (!cell || cell->empty()) continue;
        if (cell->top) return std::nullopt;
        if (cell->has_eps()) {
            if (cell->locs.size() == 1) continue;
            return std::nullopt;
        }
        auto op = rd.read(e, x, bi, ii);
        if (!op || op->is_missing()) return std::nullopt;
        out.names.push_back(x);
        out.values.push_back(*op);
    }
    return out;
}

bool delay_one(const PassContext& ctx, Version& v, Reg e) {
    Effects fx = compute_effects(v, &ctx.fn);
    ScopeResult sr = scope_fixpoint(v, fx);
    Code& c = v.body;
    Cfg cfg(c);
    DomInfo dom = compute_dominators(c);
    Locations locs(c);
    auto defs = definitions(c);
    Loc mk = defs.at(e);
    const Instr& mkenv = c.blocks[mk.block].instrs[mk.index];

    for (auto& p : v.promises)
        for (auto& b : p.code.blocks)
            for (auto& in : b.instrs)
                if (in.env.is(e) || uses_env_as_value(in, e)) return false;

    std::vector<Loc> needing, stores, deopts, deps;
    bool ok = true;
    each_body_instr(c, [&](Instr& in, int b, int i) {
        Loc l{b, i};
        if (in.dst == e) return;
        if (in.op == Op::Phi && uses_env_as_value(in, e)) ok = false;
        bool need = uses_env_as_value(in, e);
        if (in.env.is(e) && in.has_env()) {
            switch (in.op) {
                case Op::StVar: stores.push_back(l); break;
                case Op::Deopt: deopts.push_back(l); break;
                case Op::Force:
                case Op::Binop: deps.push_back(l); break;
                default: need = true; break;
            }
        }
        if (e == fx.frame_env && fx.code_running(in)) need = true;
        if (need) needing.push_back(l);
    });
    if (!ok || needing.empty()) return false;

    int D = needing[0].block;
    for (auto& l : needing) D = common_dominator(dom, D, l.block);
    if (D == mk.block || on_cycle(cfg, D) || !dom.dominates_block(mk.block, D)) return false;
    int P = static_cast<int>(c.blocks[D].instrs.size()) - 1;
    for (auto& l : needing)
        if (l.block == D) P = std::min(P, l.index);
    Loc at{D, P};
    // Insert after the Phis of D.
    while (c.blocks[D].instrs[at.index].op == Op::Phi) ++at.index;
    for (auto& l : needing)
        if (!same_or_dominates(dom, at, l)) return false;

    auto after_p = reachable_from(cfg, D);
    auto reaches_after = [&](Loc l) {
        if (l.block == D) return l.index >= at.index;
        return static_cast<bool>(after_p[l.block]);
    };
    for (auto& l : stores)
        if (!same_or_dominates(dom, at, l) && reaches_after(l)) return false;
    for (auto& l : deopts)
        if (!same_or_dominates(dom, at, l) && reaches_after(l)) return false;

    VarReader rd(v, true);
    auto main_binding = bindings_at(sr, rd, locs, e, at.block, at.index);
    if (!main_binding) return false;
    std::vector<std::pair<Loc, Binding>> deopt_envs;
    for (auto& l : deopts) {
        if (same_or_dominates(dom, at, l)) continue;
        auto b = bindings_at(sr, rd, locs, e, l.block, l.index);
        if (!b) return false;
        deopt_envs.push_back({l, *b});
    }

    // All queries done: rewrite in place, then insert/delete per block.
    Reg ne = v.fresh_register();
    Operand parent = mkenv.env;
    bool stub = mkenv.stub;
    Reg origin = mkenv.origin;
    std::vector<Pos> dels{{c.blocks[mk.block].id, mk.index}};
    for (auto& l : stores) {
        Instr& in = c.blocks[l.block].instrs[l.index];
        if (same_or_dominates(dom, at, l))
            in.env = Operand::of(ne);
        else
            dels.push_back({c.blocks[l.block].id, l.index});
    }
    for (auto& l : deps) {
        Instr& in = c.blocks[l.block].instrs[l.index];
        in.env = same_or_dominates(dom, at, l) ? Operand::of(ne) : parent;
    }
    for (auto& l : needing) {
        Instr& in = c.blocks[l.block].instrs[l.index];
        in.for_each_operand([&](Operand& a) {
            if (a.is(e)) a = Operand::of(ne);
        });
    }
    for (auto& l : deopts)
        if (same_or_dominates(dom, at, l)) c.blocks[l.block].instrs[l.index].env = Operand::of(ne);

    struct Insert {
        Loc at;
        Instr in;
    };
    std::vector<Insert> inserts;
    auto make_env = [&](Reg dst, const Binding& b) {
        Instr m(Op::MkEnv);
        m.dst = dst;
        m.names = b.names;
        m.args = b.values;
        m.env = parent;
        m.stub = stub;
        m.origin = origin;
        return m;
    };
    inserts.push_back({at, make_env(ne, *main_binding)});
    for (auto& [l, b] : deopt_envs) {
        Reg r = v.fresh_register();
        c.blocks[l.block].instrs[l.index].env = Operand::of(r);
        inserts.push_back({l, make_env(r, b)});
    }

    // Apply per block from the highest index down so positions stay valid.
    std::map<int, std::vector<std::pair<int, std::optional<Instr>>>> edits;  // block -> (index, insert?)
    for (auto& ins : inserts) edits[ins.at.block].push_back({ins.at.index, ins.in});
    for (auto& d : dels) edits[c.index_of(d.block)].push_back({d.index, std::nullopt});
    for (auto& [b, list] : edits) {
        // Deletions at an index run before insertions at the same index.
        std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return !x.second.has_value() && y.second.has_value();
        });
        auto& instrs = c.blocks[b].instrs;
        for (auto& [idx, ins] : list) {
            if (ins)
                instrs.insert(instrs.begin() + idx, *ins);
            else
                instrs.erase(instrs.begin() + idx);
        }
    }
    rd.materialize();
    return true;
}

}  // namespace

bool delay_environments(const PassContext& ctx, Version& v) {
    bool changed = false;
    std::set<Reg> tried;
    for (int n = 0; n < 16; ++n) {
        Reg cand = kNoReg;
        for (auto& b : v.body.blocks)
            for (auto& in : b.instrs)
                if (in.op == Op::MkEnv && !tried.count(in.dst) && cand == kNoReg) cand = in.dst;
        if (cand == kNoReg) break;
        tried.insert(cand);
        if (delay_one(ctx, v, cand)) {
            changed = true;
            tried.clear();
            // The moved env has a fresh register; avoid re-delaying it forever.
            for (auto& b : v.body.blocks)
                for (auto& in : b.instrs)
                    if (in.op == Op::MkEnv) tried.insert(in.dst);
        }
    }
    return changed;
}

}  // namespace pir
