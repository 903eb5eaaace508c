#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

// A Force dominated by another Force of the same register yields the memo.
bool dedup_forces(Version& v) {
    Code& c = v.body;
    DomInfo dom = compute_dominators(c);
    std::map<Reg, std::vector<Loc>> forces;
    for (int bi : dom.rpo)
        for (size_t i = 0; i < c.blocks[bi].instrs.size(); ++i) {
            const Instr& in = c.blocks[bi].instrs[i];
            if (in.op == Op::Force && in.args[0].is_reg()) forces[in.args[0].reg].push_back({bi, static_cast<int>(i)});
        }
    std::vector<std::tuple<Reg, Reg, Reg>> repls;
    std::vector<Pos> dels;
    for (auto& [reg, locs] : forces) {
        std::vector<Loc> kept;
        for (const Loc& l : locs) {
            const Instr& in = c.blocks[l.block].instrs[l.index];
            bool done = false;
            for (const Loc& k : kept)
                if (dominates(dom, k, l)) {
                    repls.push_back({in.dst, c.blocks[k.block].instrs[k.index].dst, in.origin});
                    dels.push_back({c.blocks[l.block].id, l.index});
                    done = true;
                    break;
                }
            if (!done) kept.push_back(l);
        }
    }
    if (repls.empty()) return false;
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

bool inline_one(const PassContext& ctx, Version& v) {
    Effects fx = compute_effects(v, &ctx.fn);
    PromiseResult pr = promise_fixpoint(v, fx);
    if (pr.inlinable.empty()) return false;
    auto [mkarg, flat] = *pr.inlinable.begin();
    Locations locs(v.body);
    int fb = -1, fi = -1;
    for (size_t b = 0; b < v.body.blocks.size() && fb < 0; ++b)
        for (size_t i = 0; i < v.body.blocks[b].instrs.size(); ++i)
            if (locs.at(static_cast<int>(b), static_cast<int>(i)) == flat) {
                fb = static_cast<int>(b);
                fi = static_cast<int>(i);
                break;
            }
    if (fb < 0) return false;
    auto defs = definitions(v.body);
    Loc ml = defs.at(mkarg);
    const Instr mk = v.body.blocks[ml.block].instrs[ml.index];
    const Promise* p = v.promise(mk.name);
    if (!p) return false;
    Code code = p->code;
    std::map<Reg, Operand> free_map;
    if (p->env.is_reg()) free_map[p->env.reg] = mk.env;
    for (auto& b : code.blocks)
        for (auto& in : b.instrs) in.origin = kNoReg;
    freshen(v, code, free_map);

    const Instr force = v.body.blocks[fb].instrs[fi];
    Operand result = splice(v, fb, fi, std::move(code));
    v.replace_all_uses(force.dst, result, force.origin);

    // The dominating Force was the only one left; drop any stragglers and the MkArg.
    std::vector<std::pair<Reg, Reg>> others;
    std::vector<Pos> dels;
    for (auto& b : v.body.blocks)
        for (size_t i = 0; i < b.instrs.size(); ++i) {
            const Instr& in = b.instrs[i];
            if (in.op == Op::Force && in.args[0].is(mkarg)) {
                others.push_back({in.dst, in.origin});
                dels.push_back({b.id, static_cast<int>(i)});
            } else if (in.dst == mkarg) {
                dels.push_back({b.id, static_cast<int>(i)});
            }
        }
    erase_positions(v.body, dels);
    for (auto& [dst, origin] : others) v.replace_all_uses(dst, result, origin);
    prune_promises(v);
    return true;
}

}  // namespace

bool inline_promises(const PassContext& ctx, Version& v) {
    bool changed = dedup_forces(v);
    for (int n = 0; n < 32 && inline_one(ctx, v); ++n) changed = true;
    return changed;
}

}  // namespace pir
