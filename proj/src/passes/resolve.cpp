#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

bool resolve_once(const PassContext& ctx, Version& v) {
    Effects fx = compute_effects(v, &ctx.fn);
    ScopeResult sr = scope_fixpoint(v, fx);
    VarReader rd(v, false);
    Locations locs(v.body);
    auto defs = definitions(v.body);

    struct Repl {
        Reg dst;
        Operand op;
        Reg origin;
    };
    std::vector<Repl> repls;
    std::vector<Pos> dels;
    std::vector<std::pair<Pos, Operand>> reenv;

    for (size_t b = 0; b < v.body.blocks.size(); ++b) {
        const auto& instrs = v.body.blocks[b].instrs;
        for (size_t i = 0; i < instrs.size(); ++i) {
            const Instr& in = instrs[i];
            if (in.op != Op::LdVar && in.op != Op::LdFun) continue;
            if (!in.env.is_reg() || !fx.tracked.count(in.env.reg)) continue;
            int bi = static_cast<int>(b), ii = static_cast<int>(i);
            const AbsCell* cell = sr.cell(locs.at(bi, ii), in.env.reg, in.name);
            if (!cell || cell->top || cell->empty()) continue;
            Pos pos{v.body.blocks[b].id, ii};
            if (cell->locs.size() == 1 && cell->has_eps()) {
                reenv.push_back({pos, fx.parent.at(in.env.reg)});
                continue;
            }
            if (cell->has_eps()) continue;
            auto op = rd.read(in.env.reg, in.name, bi, ii);
            if (!op || op->is_missing()) continue;
            if (in.op == Op::LdFun) {
                if (!op->is_reg()) continue;
                auto d = defs.find(op->reg);
                if (d == defs.end()) continue;
                const Instr& def = v.body.blocks[d->second.block].instrs[d->second.index];
                if (def.op != Op::MkClosure) continue;
            }
            repls.push_back({in.dst, *op, in.origin});
            dels.push_back(pos);
        }
    }
    if (repls.empty() && reenv.empty()) return false;

    for (auto& [pos, env] : reenv) v.body.block(pos.block).instrs[pos.index].env = env;
    erase_positions(v.body, dels);
    rd.materialize();
    std::map<Reg, Operand> sub;
    for (auto& r : repls) {
        Operand op = r.op;
        while (op.is_reg() && sub.count(op.reg)) op = sub.at(op.reg);
        v.replace_all_uses(r.dst, op, r.origin);
        sub[r.dst] = op;
    }
    return true;
}

}  // namespace

bool resolve_loads(const PassContext& ctx, Version& v) {
    bool changed = false;
    for (int round = 0; round < 8 && resolve_once(ctx, v); ++round) changed = true;
    return changed;
}

}  // namespace pir
