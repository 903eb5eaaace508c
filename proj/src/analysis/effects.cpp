#include "pir/analysis.hpp"

namespace pir {

namespace {

MayPromise join(MayPromise a, MayPromise b) { return a > b ? a : b; }

template <class F>
void each_instr(const Version& v, F&& f) {
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs) f(in, false);
    for (auto& p : v.promises)
        for (auto& b : p.code.blocks)
            for (auto& in : b.instrs) f(in, true);
}

bool promise_is_pure(const Promise& p, const Effects& fx) {
    for (auto& b : p.code.blocks)
        for (auto& in : b.instrs) {
            switch (in.op) {
                case Op::LdConst:
                case Op::Binop:
                case Op::Phi:
                case Op::Branch:
                case Op::Return:
                case Op::LdVar:
                    break;
                case Op::Force:
                    if (fx.of(in.args[0]) == MayPromise::Any) return false;
                    break;
                case Op::LdFun:
                    if (!in.env.is_global()) return false;
                    break;
                default:
                    return false;
            }
        }
    return true;
}

}  // namespace

MayPromise Effects::of(const Operand& a) const {
    if (!a.is_reg()) return MayPromise::None;
    auto it = mp.find(a.reg);
    return it == mp.end() ? MayPromise::None : it->second;
}

bool Effects::code_running(const Instr& in) const {
    switch (in.op) {
        case Op::Call: return true;
        case Op::LdFun: return !in.env.is_global();
        case Op::Force: return of(in.args[0]) == MayPromise::Any;
        default: return false;
    }
}

bool Effects::may_force(const Instr& in) const { return in.op == Op::Force && of(in.args[0]) != MayPromise::None; }

Effects compute_effects(const Version& v, const Function* fn) {
    Effects fx;
    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs)
            if (in.op == Op::MkEnv) {
                fx.tracked.insert(in.dst);
                fx.parent[in.dst] = in.env;
                if (in.stub) fx.stubs.insert(in.dst);
                if (fn && !fn->top_level && in.origin != kNoReg && in.origin == fn->entry_env) fx.frame_env = in.dst;
            }
    bool eager = v.has(Assumption::EagerArgs);

    // Optimistic start: every promise pure; shrink until stable.
    for (auto& p : v.promises) fx.pure_promises.insert(p.id);
    for (int round = 0; round < 64; ++round) {
        // (env, var) -> what a binding may hold
        std::map<std::pair<Reg, std::string>, MayPromise> holds;
        bool changed = true;
        fx.mp.clear();
        auto lookup = [&](Reg env, const std::string& x) {
            MayPromise r = MayPromise::None;
            std::set<Reg> seen;
            Operand cur = Operand::of(env);
            while (true) {
                if (cur.is_global()) return r;
                if (!cur.is_reg() || !fx.tracked.count(cur.reg) || !seen.insert(cur.reg).second)
                    return MayPromise::Any;
                auto it = holds.find({cur.reg, x});
                if (it != holds.end()) r = join(r, it->second);
                cur = fx.parent.at(cur.reg);
            }
        };
        while (changed) {
            changed = false;
            auto set = [&](Reg r, MayPromise m) {
                auto& slot = fx.mp[r];
                if (m > slot) {
                    slot = m;
                    changed = true;
                }
            };
            auto hold = [&](Reg env, const std::string& x, MayPromise m) {
                auto& slot = holds[{env, x}];
                if (m > slot) {
                    slot = m;
                    changed = true;
                }
            };
            each_instr(v, [&](const Instr& in, bool) {
                switch (in.op) {
                    case Op::LdArg:
                        set(in.dst, eager ? MayPromise::None : MayPromise::Any);
                        break;
                    case Op::MkArg:
                        set(in.dst, fx.pure_promises.count(in.name) ? MayPromise::Pure : MayPromise::Any);
                        break;
                    case Op::Phi:
                        for (auto& a : in.args) set(in.dst, fx.of(a));
                        break;
                    case Op::LdVar:
                        if (in.env.is_global()) {
                            set(in.dst, MayPromise::None);
                        } else if (in.env.is_reg() && fx.tracked.count(in.env.reg)) {
                            set(in.dst, lookup(in.env.reg, in.name));
                        } else {
                            set(in.dst, MayPromise::Any);
                        }
                        break;
                    case Op::MkEnv:
                        for (size_t k = 0; k < in.args.size(); ++k)
                            hold(in.dst, in.names[k], fx.of(in.args[k]));
                        break;
                    case Op::StVar:
                        if (in.env.is_reg() && fx.tracked.count(in.env.reg))
                            hold(in.env.reg, in.name, fx.of(in.args[0]));
                        break;
                    default:
                        break;
                }
            });
        }
        std::set<std::string> pure;
        for (auto& p : v.promises)
            if (fx.pure_promises.count(p.id) && promise_is_pure(p, fx)) pure.insert(p.id);
        if (pure == fx.pure_promises) break;
        fx.pure_promises = std::move(pure);
    }

    for (auto& b : v.body.blocks)
        for (auto& in : b.instrs) {
            if (fx.code_running(in)) fx.any_code_running = true;
            for (auto& a : in.args)
                if (a.is_reg() && fx.tracked.count(a.reg)) fx.value_use.insert(a.reg);
            if (!in.env.is_reg() || !fx.tracked.count(in.env.reg)) continue;
            switch (in.op) {
                case Op::MkArg:
                case Op::MkClosure:
                case Op::MkEnv:
                case Op::Call:
                    fx.exposed.insert(in.env.reg);
                    break;
                default:
                    break;
            }
        }
    for (auto& p : v.promises)
        for (auto& b : p.code.blocks)
            for (auto& in : b.instrs) {
                if (in.op == Op::StVar && in.env.is_reg() && fx.tracked.count(in.env.reg))
                    fx.promise_written.insert(in.env.reg);
                if (in.env.is_reg() && fx.tracked.count(in.env.reg) &&
                    (in.op == Op::Call || in.op == Op::MkArg || in.op == Op::MkClosure || in.op == Op::MkEnv))
                    fx.exposed.insert(in.env.reg);
                for (auto& a : in.args)
                    if (a.is_reg() && fx.tracked.count(a.reg)) fx.value_use.insert(a.reg);
            }
    for (Reg r : fx.value_use) fx.exposed.insert(r);
    if (fx.frame_env != kNoReg && fx.any_code_running) fx.exposed.insert(fx.frame_env);
    return fx;
}

}  // namespace pir
