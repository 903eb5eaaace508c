#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

using Bits = std::vector<char>;

struct DseModel {
    const Effects& fx;
    ScopeDomain d;

    void gen_env(Bits& live, Reg env) const {
        int e = d.env(env);
        if (e < 0) return;
        for (size_t x = 0; x < d.vars.size(); ++x) live[d.cell(e, static_cast<int>(x))] = 1;
    }
    void gen_exposed(Bits& live) const {
        for (Reg e : fx.exposed) gen_env(live, e);
    }
    // Walks tracked ancestors starting at `env` itself.
    template <class F>
    void chain(Operand env, F&& f) const {
        std::set<Reg> seen;
        while (env.is_reg() && d.env(env.reg) >= 0 && seen.insert(env.reg).second) {
            f(env.reg);
            env = fx.parent.at(env.reg);
        }
    }

    // Returns true if `in` is a dead store given liveness after it.
    bool step(const Instr& in, Bits& live) const {
        switch (in.op) {
            case Op::MkEnv:
                if (!fx.exposed.count(in.dst)) {
                    int e = d.env(in.dst);
                    for (size_t x = 0; x < d.vars.size(); ++x) live[d.cell(e, static_cast<int>(x))] = 0;
                }
                return false;
            case Op::StVar: {
                int e = in.env.is_reg() ? d.env(in.env.reg) : -1;
                if (e < 0) return false;
                size_t k = d.cell(e, d.var(in.name));
                bool dead = !live[k];
                live[k] = 0;
                return dead;
            }
            case Op::LdVar:
            case Op::LdFun: {
                int x = d.var(in.name);
                chain(in.env, [&](Reg r) { live[d.cell(d.env(r), x)] = 1; });
                if (in.op == Op::LdFun && fx.code_running(in)) gen_exposed(live);
                return false;
            }
            case Op::Deopt:
                chain(in.env, [&](Reg r) { gen_env(live, r); });
                gen_exposed(live);
                return false;
            case Op::Return:
                gen_exposed(live);
                return false;
            default:
                if (fx.code_running(in) || fx.may_force(in)) gen_exposed(live);
                return false;
        }
    }
};

}  // namespace

bool dead_store_elim(const PassContext& ctx, Version& v) {
    Effects fx = compute_effects(v, &ctx.fn);
    DseModel m{fx, scope_domain(v)};
    if (m.d.envs.empty()) return false;
    const Code& c = v.body;
    Cfg cfg(c);
    size_t nb = c.blocks.size();
    std::vector<Bits> live_in(nb, Bits(m.d.size(), 0));
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t b = nb; b-- > 0;) {
            Bits live(m.d.size(), 0);
            for (int s : cfg.succs[b])
                for (size_t k = 0; k < live.size(); ++k) live[k] |= live_in[s][k];
            for (size_t i = c.blocks[b].instrs.size(); i-- > 0;) m.step(c.blocks[b].instrs[i], live);
            if (live != live_in[b]) {
                live_in[b] = std::move(live);
                changed = true;
            }
        }
    }
    std::vector<Pos> dead;
    for (size_t b = 0; b < nb; ++b) {
        Bits live(m.d.size(), 0);
        for (int s : cfg.succs[b])
            for (size_t k = 0; k < live.size(); ++k) live[k] |= live_in[s][k];
        for (size_t i = c.blocks[b].instrs.size(); i-- > 0;)
            if (m.step(c.blocks[b].instrs[i], live)) dead.push_back(Pos{c.blocks[b].id, static_cast<int>(i)});
    }
    if (dead.empty()) return false;
    erase_positions(v.body, dead);
    return true;
}

}  // namespace pir
