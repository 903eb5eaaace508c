#include <deque>

#include "pir/analysis.hpp"

namespace pir {

void AbsCell::join(const AbsCell& o) {
    if (top) return;
    if (o.top) {
        top = true;
        locs.clear();
        return;
    }
    locs.insert(o.locs.begin(), o.locs.end());
}

bool AbsCell::leq(const AbsCell& o) const {
    if (o.top) return true;
    if (top) return false;
    for (int l : locs)
        if (!o.locs.count(l)) return false;
    return true;
}

void ScopeState::join(const ScopeState& o) {
    for (size_t i = 0; i < cells.size(); ++i) cells[i].join(o.cells[i]);
}

bool ScopeState::leq(const ScopeState& o) const {
    for (size_t i = 0; i < cells.size(); ++i)
        if (!cells[i].leq(o.cells[i])) return false;
    return true;
}

int ScopeDomain::env(Reg r) const {
    auto it = env_index.find(r);
    return it == env_index.end() ? -1 : it->second;
}

int ScopeDomain::var(const std::string& n) const {
    auto it = var_index.find(n);
    return it == var_index.end() ? -1 : it->second;
}

ScopeDomain scope_domain(const Version& v) {
    ScopeDomain d;
    std::set<std::string> names;
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs) {
            switch (in.op) {
                case Op::MkEnv:
                    d.env_index[in.dst] = static_cast<int>(d.envs.size());
                    d.envs.push_back(in.dst);
                    names.insert(in.names.begin(), in.names.end());
                    break;
                case Op::StVar:
                case Op::LdVar:
                case Op::LdFun:
                    names.insert(in.name);
                    break;
                default:
                    break;
            }
        }
    for (auto& n : names) {
        d.var_index[n] = static_cast<int>(d.vars.size());
        d.vars.push_back(n);
    }
    return d;
}

ScopeState scope_bottom(const ScopeDomain& d) {
    ScopeState s;
    s.cells.resize(d.size());
    return s;
}

ScopeState scope_transfer(const ScopeDomain& d, const Effects& fx, int loc, const Instr& in, const ScopeState& s) {
    ScopeState r = s;
    switch (in.op) {
        case Op::MkEnv: {
            int e = d.env(in.dst);
            if (e < 0) break;
            for (size_t x = 0; x < d.vars.size(); ++x) r.cells[d.cell(e, static_cast<int>(x))] = AbsCell::single(AbsCell::kEps);
            for (auto& n : in.names) r.cells[d.cell(e, d.var(n))] = AbsCell::single(loc);
            break;
        }
        case Op::StVar: {
            int e = in.env.is_reg() ? d.env(in.env.reg) : -1;
            int x = d.var(in.name);
            if (e >= 0 && x >= 0) r.cells[d.cell(e, x)] = AbsCell::single(loc);
            break;
        }
        default:
            if (!fx.code_running(in)) break;
            for (size_t e = 0; e < d.envs.size(); ++e) {
                Reg reg = d.envs[e];
                if (fx.stubs.count(reg) || !fx.exposed.count(reg)) continue;
                for (size_t x = 0; x < d.vars.size(); ++x) {
                    AbsCell& c = r.cells[d.cell(static_cast<int>(e), static_cast<int>(x))];
                    if (!c.empty()) c = AbsCell::make_top();
                }
            }
            break;
    }
    return r;
}

const AbsCell* ScopeResult::cell(int loc, Reg env, const std::string& var) const {
    int e = domain.env(env);
    int x = domain.var(var);
    if (e < 0 || x < 0 || loc < 0 || loc >= static_cast<int>(before.size())) return nullptr;
    return &before[loc].cells[domain.cell(e, x)];
}

ScopeResult scope_fixpoint(const Version& v, const Effects& fx) {
    ScopeResult res;
    res.domain = scope_domain(v);
    const Code& c = v.body;
    Cfg cfg(c);
    DomInfo dom = compute_dominators(c);
    Locations locs(c);
    size_t nb = c.blocks.size();
    ScopeState bottom = scope_bottom(res.domain);
    std::vector<ScopeState> in(nb, bottom);
    std::vector<bool> seen(nb, false);

    std::vector<int> order_pos(nb, 0);
    for (size_t i = 0; i < dom.rpo.size(); ++i) order_pos[dom.rpo[i]] = static_cast<int>(i);
    std::set<std::pair<int, int>> work;  // (rpo position, block index)
    if (nb) {
        work.insert({0, 0});
        seen[0] = true;
    }
    while (!work.empty()) {
        int b = work.begin()->second;
        work.erase(work.begin());
        ScopeState s = in[b];
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i)
            s = scope_transfer(res.domain, fx, locs.at(b, static_cast<int>(i)), c.blocks[b].instrs[i], s);
        for (int succ : cfg.succs[b]) {
            ScopeState joined = in[succ];
            joined.join(s);
            if (!seen[succ] || !(joined == in[succ])) {
                seen[succ] = true;
                in[succ] = std::move(joined);
                work.insert({order_pos[succ], succ});
            }
        }
    }

    res.before.assign(c.instr_count(), bottom);
    for (size_t b = 0; b < nb; ++b) {
        if (!seen[b]) continue;
        ScopeState s = in[b];
        for (size_t i = 0; i < c.blocks[b].instrs.size(); ++i) {
            int l = locs.at(static_cast<int>(b), static_cast<int>(i));
            res.before[l] = s;
            s = scope_transfer(res.domain, fx, l, c.blocks[b].instrs[i], s);
        }
    }
    return res;
}

}  // namespace pir
