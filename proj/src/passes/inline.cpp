#include "pir/analysis.hpp"
#include "pir/passes.hpp"
#include "util.hpp"

namespace pir {

using namespace detail;

namespace {

constexpr size_t kMaxCalleeInstrs = 50;
constexpr int kMaxInlinesPerRun = 16;

struct Target {
    const Function* callee = nullptr;
    Operand env;  // closure env
};

std::optional<Target> call_target(const PassContext& ctx, const Version& v, const std::map<Reg, Loc>& defs,
                                  const Instr& call) {
    const Operand& f = call.args[0];
    if (!f.is_reg()) return std::nullopt;
    auto d = defs.find(f.reg);
    if (d == defs.end()) return std::nullopt;
    const Instr& def = v.body.blocks[d->second.block].instrs[d->second.index];
    Target t;
    if (def.op == Op::MkClosure) {
        t.callee = &ctx.prog.fn(def.name);
        t.env = def.env;
    } else if (def.op == Op::LdFun && def.env.is_global()) {
        auto it = ctx.prog.stable_globals.find(def.name);
        if (it == ctx.prog.stable_globals.end()) return std::nullopt;
        t.callee = &ctx.prog.fn(it->second);
        t.env = Operand::global();
    } else {
        return std::nullopt;
    }
    const Function& g = *t.callee;
    if (g.id == ctx.fn.id || g.top_level) return std::nullopt;
    if (g.param_count() + 1 != static_cast<int>(call.args.size())) return std::nullopt;
    const Version& base = g.baseline();
    if (base.body.instr_count() > kMaxCalleeInstrs) return std::nullopt;
    for (auto& b : base.body.blocks)
        for (auto& in : b.instrs)
            if (in.op == Op::Call || in.op == Op::Deopt || in.op == Op::MkArg) return std::nullopt;
    return t;
}

}  // namespace

bool inline_closure(const PassContext& ctx, Version& v, int block, int index) {
    auto defs = definitions(v.body);
    const Instr call = v.body.blocks[block].instrs[index];
    if (call.op != Op::Call) return false;
    auto t = call_target(ctx, v, defs, call);
    if (!t) return false;

    Code code = t->callee->baseline().body;
    std::map<Reg, Operand> args;
    for (auto& b : code.blocks)
        std::erase_if(b.instrs, [&](const Instr& in) {
            if (in.op != Op::LdArg) return false;
            args[in.dst] = call.args[1 + in.index];
            return true;
        });
    Version saved = v;
    freshen(v, code, args);
    for (auto& b : code.blocks)
        for (auto& in : b.instrs) {
            in.origin = kNoReg;
            in.for_each_operand([&](Operand& a) {
                if (a.is_open()) a = t->env;
            });
        }
    std::set<Reg> inlined;
    for (auto& b : code.blocks)
        for (auto& in : b.instrs)
            if (in.dst != kNoReg) inlined.insert(in.dst);
    Operand result = splice(v, block, index, std::move(code));
    v.replace_all_uses(call.dst, result, call.origin);

    Effects fx = compute_effects(v, &ctx.fn);
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs)
            if (in.dst != kNoReg && inlined.count(in.dst) && fx.code_running(in)) {
                v = std::move(saved);
                return false;
            }
    return true;
}

bool inline_closures(const PassContext& ctx, Version& v) {
    bool changed = false;
    std::set<Reg> failed;
    for (int n = 0; n < kMaxInlinesPerRun; ++n) {
        bool did = false;
        for (size_t b = 0; b < v.body.blocks.size() && !did; ++b)
            for (size_t i = 0; i < v.body.blocks[b].instrs.size() && !did; ++i) {
                const Instr& in = v.body.blocks[b].instrs[i];
                if (in.op != Op::Call || failed.count(in.dst)) continue;
                Reg dst = in.dst;
                if (inline_closure(ctx, v, static_cast<int>(b), static_cast<int>(i)))
                    did = true;
                else
                    failed.insert(dst);
            }
        if (!did) break;
        changed = true;
    }
    return changed;
}

}  // namespace pir
