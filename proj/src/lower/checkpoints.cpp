#include "pir/cfg.hpp"
#include "pir/lower.hpp"

namespace pir {

std::vector<std::set<Reg>> live_before(const Code& c) {
    Cfg g(c);
    size_t n = c.blocks.size();
    std::vector<std::set<Reg>> live_in(n), live_out(n);

    // Phi inputs are live at the end of the matching predecessor.
    std::vector<std::set<Reg>> phi_uses(n);
    for (size_t b = 0; b < n; ++b)
        for (auto& in : c.blocks[b].instrs) {
            if (in.op != Op::Phi) continue;
            for (size_t k = 0; k < in.args.size(); ++k) {
                int p = c.index_of(in.targets[k]);
                if (p >= 0 && in.args[k].is_reg()) phi_uses[p].insert(in.args[k].reg);
            }
        }

    auto transfer = [&](size_t b, std::set<Reg> live) {
        auto& instrs = c.blocks[b].instrs;
        for (size_t i = instrs.size(); i-- > 0;) {
            const Instr& in = instrs[i];
            if (in.dst != kNoReg) live.erase(in.dst);
            if (in.op == Op::Phi) continue;
            in.for_each_operand([&](const Operand& a) {
                if (a.is_reg()) live.insert(a.reg);
            });
        }
        return live;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t b = n; b-- > 0;) {
            std::set<Reg> out = phi_uses[b];
            for (int s : g.succs[b]) {
                for (Reg r : live_in[s]) out.insert(r);
            }
            // Phi definitions of successors are not live-out here.
            std::set<Reg> in = transfer(b, out);
            if (out != live_out[b] || in != live_in[b]) {
                live_out[b] = std::move(out);
                live_in[b] = std::move(in);
                changed = true;
            }
        }
    }

    Locations locs(c);
    std::vector<std::set<Reg>> result(c.instr_count());
    for (size_t b = 0; b < n; ++b) {
        auto& instrs = c.blocks[b].instrs;
        std::set<Reg> live = live_out[b];
        for (size_t i = instrs.size(); i-- > 0;) {
            const Instr& in = instrs[i];
            if (in.dst != kNoReg) live.erase(in.dst);
            if (in.op != Op::Phi)
                in.for_each_operand([&](const Operand& a) {
                    if (a.is_reg()) live.insert(a.reg);
                });
            result[locs.at(static_cast<int>(b), static_cast<int>(i))] = live;
        }
    }
    return result;
}

std::vector<Checkpoint> emit_checkpoints(const Code& baseline, Reg entry_env) {
    std::vector<Checkpoint> cps;
    Checkpoint entry;
    entry.id = 0;
    entry.block = baseline.blocks.front().id;
    entry.index = 0;
    cps.push_back(entry);

    auto live = live_before(baseline);
    Locations locs(baseline);
    for (size_t b = 0; b < baseline.blocks.size(); ++b) {
        auto& instrs = baseline.blocks[b].instrs;
        for (size_t i = 0; i < instrs.size(); ++i) {
            const Instr& in = instrs[i];
            if (in.op != Op::Call && in.op != Op::Force && in.op != Op::LdFun) continue;
            Checkpoint cp;
            cp.id = static_cast<int>(cps.size());
            cp.block = baseline.blocks[b].id;
            cp.index = static_cast<int>(i) + 1;
            cp.after = in.dst;
            // The instruction after an effect always exists: effects are never terminators.
            for (Reg r : live[locs.at(static_cast<int>(b), static_cast<int>(i) + 1)])
                if (r != entry_env) cp.live.push_back(r);
            cps.push_back(std::move(cp));
        }
    }
    return cps;
}

}  // namespace pir
