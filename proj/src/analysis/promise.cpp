#include "pir/analysis.hpp"

namespace pir {

void PromAbs::join(const PromAbs& o) {
    if (o.kind == Kind::Unreached || *this == o) return;
    if (kind == Kind::Unreached) {
        *this = o;
        return;
    }
    *this = of(Kind::Top);
}

bool PromAbs::leq(const PromAbs& o) const {
    return kind == Kind::Unreached || o.kind == Kind::Top || *this == o;
}

PromState promise_transfer(const std::map<Reg, int>& mkargs, const Effects& fx, int loc, const Instr& in,
                           const PromState& s) {
    PromState r = s;
    auto slot = [&](const Operand& a) -> int {
        if (!a.is_reg()) return -1;
        auto it = mkargs.find(a.reg);
        return it == mkargs.end() ? -1 : it->second;
    };
    if (in.op == Op::MkArg) {
        int k = slot(Operand::of(in.dst));
        if (k >= 0) r[k] = PromAbs::of(PromAbs::Kind::Bot);
    } else if (in.op == Op::Force) {
        int k = slot(in.args[0]);
        if (k >= 0) {
            if (r[k].kind == PromAbs::Kind::Bot)
                r[k] = PromAbs::of(PromAbs::Kind::Forced, loc);
            else if (r[k].kind == PromAbs::Kind::Leaked)
                r[k] = PromAbs::of(PromAbs::Kind::Top);
        }
    } else {
        for (auto& a : in.args) {
            int k = slot(a);
            if (k >= 0 && r[k].kind == PromAbs::Kind::Bot) r[k] = PromAbs::of(PromAbs::Kind::Leaked);
        }
    }
    if (fx.code_running(in))
        for (auto& p : r)
            if (p.kind == PromAbs::Kind::Leaked) p = PromAbs::of(PromAbs::Kind::Top);
    return r;
}

PromiseResult promise_fixpoint(const Version& v, const Effects& fx) {
    PromiseResult res;
    const Code& c = v.body;
    for (auto& b : c.blocks)
        for (auto& in : b.instrs)
            if (in.op == Op::MkArg) res.mkargs.emplace(in.dst, static_cast<int>(res.mkargs.size()));
    size_t n = res.mkargs.size();
    Cfg cfg(c);
    DomInfo dom = compute_dominators(c);
    Locations locs(c);
    size_t nb = c.blocks.size();
    PromState unreached(n);
    std::vector<PromState> in(nb, unreached);
    std::vector<bool> seen(nb, false);
    std::vector<int> order_pos(nb, 0);
    for (size_t i = 0; i < dom.rpo.size(); ++i) order_pos[dom.rpo[i]] = static_cast<int>(i);
    std::set<std::pair<int, int>> work;
    if (nb) {
        in[0] = PromState(n, PromAbs::of(PromAbs::Kind::Bot));
        seen[0] = true;
        work.insert({0, 0});
    }
    while (!work.empty()) {
        int b = work.begin()->second;
        work.erase(work.begin());
        PromState s = in[b];
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i)
            s = promise_transfer(res.mkargs, fx, locs.at(b, static_cast<int>(i)), c.blocks[b].instrs[i], s);
        for (int succ : cfg.succs[b]) {
            PromState joined = in[succ];
            for (size_t k = 0; k < n; ++k) joined[k].join(s[k]);
            if (!seen[succ] || joined != in[succ]) {
                seen[succ] = true;
                in[succ] = std::move(joined);
                work.insert({order_pos[succ], succ});
            }
        }
    }

    res.before.assign(c.instr_count(), unreached);
    PromState at_return = unreached;
    std::map<Reg, std::vector<std::pair<int, Loc>>> forces;  // MkArg -> (flat loc, loc)
    std::map<Reg, int> other_uses;
    for (size_t b = 0; b < nb; ++b) {
        PromState s = in[b];
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            const Instr& ins = c.blocks[b].instrs[i];
            int l = locs.at(static_cast<int>(b), static_cast<int>(i));
            if (seen[b]) res.before[l] = s;
            if (ins.op == Op::Return)
                for (size_t k = 0; k < n; ++k) at_return[k].join(s[k]);
            if (ins.op == Op::Force && ins.args[0].is_reg() && res.mkargs.count(ins.args[0].reg)) {
                forces[ins.args[0].reg].push_back({l, Loc{static_cast<int>(b), static_cast<int>(i)}});
            } else {
                ins.for_each_operand([&](const Operand& a) {
                    if (a.is_reg() && res.mkargs.count(a.reg)) other_uses[a.reg]++;
                });
            }
            if (seen[b]) s = promise_transfer(res.mkargs, fx, l, ins, s);
        }
    }
    for (auto& p : v.promises)
        for (auto& b : p.code.blocks)
            for (auto& ins : b.instrs)
                ins.for_each_operand([&](const Operand& a) {
                    if (a.is_reg() && res.mkargs.count(a.reg)) other_uses[a.reg]++;
                });

    for (auto& [reg, k] : res.mkargs) {
        res.final_state[reg] = at_return[k];
        if (other_uses[reg] || forces[reg].empty()) continue;
        for (auto& [l, loc] : forces[reg]) {
            if (res.before[l][k].kind != PromAbs::Kind::Bot) continue;
            bool dominates_all = true;
            for (auto& [l2, loc2] : forces[reg])
                if (l2 != l && !dominates(dom, loc, loc2)) dominates_all = false;
            if (dominates_all) {
                res.inlinable[reg] = l;
                break;
            }
        }
    }
    return res;
}

}  // namespace pir
