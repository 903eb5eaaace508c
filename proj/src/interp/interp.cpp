#include <cmath>

#include "machine.hpp"

namespace pir {

namespace {

struct DepthGuard {
    int& d;
    explicit DepthGuard(int& depth, int limit) : d(depth) {
        if (++d > limit) {
            --d;
            raise(ErrorKind::StackOverflow, "evaluation nested too deeply");
        }
    }
    ~DepthGuard() { --d; }
};

const Version& select_version(const Function& fn, const std::vector<Value>& args, VersionSelector sel) {
    if (sel == VersionSelector::Baseline) return fn.baseline();
    for (size_t i = fn.versions.size(); i-- > 1;) {
        const Version& v = fn.versions[i];
        bool ok = true;
        if (v.has(Assumption::EagerArgs))
            for (auto& a : args)
                if (a.is_promise()) ok = false;
        if (ok) return v;
    }
    return fn.baseline();
}

}  // namespace

Machine::Machine(const Program& p, const RunOptions& o) : prog_(p), opt_(o) {}

const CodeInfo& Machine::info(const Code& c) {
    auto it = info_.find(&c);
    if (it != info_.end()) return it->second;
    CodeInfo ci;
    int n = 0;
    for (size_t i = 0; i < c.blocks.size(); ++i) {
        ci.index[c.blocks[i].id] = static_cast<int>(i);
        ci.start.push_back(n);
        n += static_cast<int>(c.blocks[i].instrs.size());
    }
    return info_.emplace(&c, std::move(ci)).first->second;
}

EnvObj* Machine::new_env(EnvObj* parent, bool stub, const std::string& label) {
    envs_.emplace_back();
    EnvObj* e = &envs_.back();
    e->id = static_cast<int>(envs_.size());
    e->parent = parent;
    e->stub = stub;
    e->label = label;
    if (stub)
        counters_.stub_envs_created++;
    else
        counters_.envs_created++;
    return e;
}

void Machine::materialize(EnvObj* e) {
    if (!e->stub || e->materialized) return;
    e->materialized = true;
    counters_.envs_created++;
    counters_.stubs_materialized++;
}

EnvObj* Machine::env_of(const Value& v, const char* what) {
    if (v.kind != Value::Kind::Env) raise(ErrorKind::TypeError, std::string(what) + " is not an environment");
    return v.env;
}

Value Machine::force(const Value& v) {
    Value cur = v;
    while (cur.is_promise()) {
        PromiseObj* p = cur.promise;
        if (p->has_memo) {
            cur = p->memo;
            continue;
        }
        if (p->forcing) raise(ErrorKind::PromiseRecursion, "promise already under evaluation");
        DepthGuard guard(depth_, opt_.depth_limit);
        p->forcing = true;
        std::vector<Value> regs(p->version->next_reg);
        if (p->code->env.is_reg()) regs[p->code->env.reg] = Value::of_env(p->env);
        Activation act{p->fn, p->version, &p->code->code, nullptr, nullptr, current_frame()};
        Value r = exec(act, regs, 0, 0);
        p->forcing = false;
        p->has_memo = true;
        p->memo = r;
        counters_.promises_forced++;
        cur = r;
    }
    return cur;
}

Value Machine::ldfun(const std::string& name, EnvObj* env) {
    for (EnvObj* e = env; e; e = e->parent) {
        Binding* b = e->find(name);
        if (!b) continue;
        Value v = b->value;
        if (v.is_promise()) v = force(v);
        if (v.is_function()) return v;
    }
    raise(ErrorKind::NotAFunction, "could not find function \"" + name + "\"");
}

Value Machine::call(const Value& f, std::vector<Value>& args, EnvObj* eval_env) {
    if (f.kind == Value::Kind::Builtin) {
        for (auto& a : args) a = force(a);
        counters_.calls++;
        return call_builtin(f.builtin, args, eval_env);
    }
    if (f.kind != Value::Kind::Closure) raise(ErrorKind::NotAFunction, "attempt to apply non-function");
    const Function& fn = *f.closure->fn;
    if (static_cast<int>(args.size()) != fn.param_count())
        raise(ErrorKind::ArityMismatch, fn.id + " expects " + std::to_string(fn.param_count()) + " arguments");
    counters_.calls++;
    DepthGuard guard(depth_, opt_.depth_limit);
    const Version& ver = select_version(fn, args, opt_.selector);
    frames_.push_back(Frame{&fn, nullptr, eval_env});
    std::vector<Value> regs(ver.next_reg);
    Activation act{&fn, &ver, &ver.body, &args, f.closure, current_frame()};
    Value r = exec(act, regs, 0, 0);
    frames_.pop_back();
    return r;
}

Value Machine::exec(const Activation& act, std::vector<Value>& regs, int block, int index) {
    const Code& code = *act.code;
    const CodeInfo& ci = info(code);
    BlockId prev = -1;
    bool roundtrip = opt_.checkpoint_roundtrip && act.args != nullptr && act.version == &act.fn->baseline();
    if (act.fn->top_level && act.code == &act.fn->baseline().body) roundtrip = opt_.checkpoint_roundtrip;

    auto env_ptr = [&](const Operand& a) -> EnvObj* {
        switch (a.kind) {
            case Operand::Kind::Global: return global_;
            case Operand::Kind::Open: return act.closure ? act.closure->env : global_;
            case Operand::Kind::Reg: {
                const Value& v = regs[a.reg];
                if (v.kind != Value::Kind::Env) throw std::logic_error("register is not an environment");
                return v.env;
            }
            case Operand::Kind::Missing: break;
        }
        throw std::logic_error("missing environment operand");
    };
    auto val = [&](const Operand& a) -> Value {
        switch (a.kind) {
            case Operand::Kind::Reg: return regs[a.reg];
            case Operand::Kind::Global:
            case Operand::Kind::Open: return Value::of_env(env_ptr(a));
            case Operand::Kind::Missing: return Value{};
        }
        return Value{};
    };

    while (true) {
        const BasicBlock& bb = code.blocks[block];
        if (index == 0 && !bb.instrs.empty() && bb.instrs[0].op == Op::Phi) {
            std::vector<std::pair<Reg, Value>> moves;
            size_t i = 0;
            for (; i < bb.instrs.size() && bb.instrs[i].op == Op::Phi; ++i) {
                const Instr& phi = bb.instrs[i];
                size_t k = 0;
                while (k < phi.targets.size() && phi.targets[k] != prev) ++k;
                if (k == phi.targets.size()) throw std::logic_error("phi without input for predecessor");
                moves.emplace_back(phi.dst, val(phi.args[k]));
            }
            for (auto& [r, v] : moves) regs[r] = std::move(v);
            index = static_cast<int>(i);
        }
        bool jumped = false;
        while (index < static_cast<int>(bb.instrs.size()) && !jumped) {
            if (++steps_ > opt_.step_limit) raise(ErrorKind::StepLimit, "step limit exceeded");
            if (roundtrip) {
                for (auto& cp : act.fn->checkpoints) {
                    if (cp.block != bb.id || cp.index != index) continue;
                    std::vector<Value> kept(regs.size());
                    for (Reg r : cp.live) kept[r] = regs[r];
                    if (act.fn->entry_env != kNoReg) kept[act.fn->entry_env] = regs[act.fn->entry_env];
                    regs = std::move(kept);
                }
            }
            const Instr& in = bb.instrs[index];
            int loc = ci.start[block] + index;
            switch (in.op) {
                case Op::LdConst:
                    regs[in.dst] = Value::of(in.constant);
                    break;
                case Op::LdArg:
                    regs[in.dst] = (*act.args)[in.index];
                    break;
                case Op::LdVar: {
                    EnvObj* e = env_ptr(in.env);
                    if (opt_.hooks && in.env.is_reg()) opt_.hooks->on_load(code, loc, *e, in.name, e->find(in.name));
                    Binding* b = nullptr;
                    for (EnvObj* s = e; s && !b; s = s->parent) b = s->find(in.name);
                    if (!b) raise(ErrorKind::UnboundVariable, "object '" + in.name + "' not found");
                    regs[in.dst] = b->value;
                    break;
                }
                case Op::LdFun:
                    regs[in.dst] = ldfun(in.name, env_ptr(in.env));
                    break;
                case Op::StVar: {
                    EnvObj* e = env_ptr(in.env);
                    Binding* b = e->find(in.name);
                    if (!b) {
                        e->bindings.push_back(Binding{in.name, {}, nullptr, -1});
                        b = &e->bindings.back();
                    }
                    b->value = val(in.args[0]);
                    if (opt_.track_writers) {
                        b->writer_code = &code;
                        b->writer_loc = loc;
                    }
                    break;
                }
                case Op::MkEnv: {
                    EnvObj* e = new_env(env_ptr(in.env), in.stub, act.fn->top_level ? "R_GlobalEnv" : act.fn->id);
                    for (size_t k = 0; k < in.args.size(); ++k) {
                        Value v = val(in.args[k]);
                        if (v.kind == Value::Kind::Missing) continue;
                        e->bindings.push_back(Binding{in.names[k], v, opt_.track_writers ? &code : nullptr,
                                                      opt_.track_writers ? loc : -1});
                    }
                    regs[in.dst] = Value::of_env(e);
                    if (act.args && in.origin != kNoReg && in.origin == act.fn->entry_env)
                        frames_[act.frame].env = e;
                    break;
                }
                case Op::MkArg: {
                    promises_.emplace_back();
                    PromiseObj* p = &promises_.back();
                    p->fn = act.fn;
                    p->version = act.version;
                    p->code = act.version->promise(in.name);
                    if (!p->code) throw std::logic_error("unknown promise " + in.name);
                    p->env = env_ptr(in.env);
                    counters_.promises_created++;
                    regs[in.dst] = Value::of_promise(p);
                    break;
                }
                case Op::MkClosure: {
                    closures_.emplace_back();
                    ClosureObj* c = &closures_.back();
                    c->fn = &prog_.fn(in.name);
                    c->env = env_ptr(in.env);
                    regs[in.dst] = Value::of_closure(c);
                    break;
                }
                case Op::Force: {
                    Value v = val(in.args[0]);
                    if (v.is_promise()) {
                        if (opt_.hooks) opt_.hooks->on_force(code, loc, *v.promise, !v.promise->has_memo);
                        v = force(v);
                    }
                    regs[in.dst] = v;
                    break;
                }
                case Op::Call: {
                    Value f = val(in.args[0]);
                    std::vector<Value> args;
                    for (size_t k = 1; k < in.args.size(); ++k) args.push_back(val(in.args[k]));
                    regs[in.dst] = call(f, args, env_ptr(in.env));
                    break;
                }
                case Op::Binop:
                    regs[in.dst] = binop(in.binop, val(in.args[0]), val(in.args[1]));
                    break;
                case Op::IsMaterialized:
                    regs[in.dst] = Value::of(Vec::logical(env_ptr(in.env)->materialized));
                    break;
                case Op::Phi:
                    throw std::logic_error("Phi in block body");
                case Op::Branch: {
                    BlockId target = in.targets[0];
                    if (!in.args.empty() && !truthy(val(in.args[0]))) target = in.targets[1];
                    prev = bb.id;
                    block = ci.index.at(target);
                    index = 0;
                    jumped = true;
                    break;
                }
                case Op::Return:
                    return val(in.args[0]);
                case Op::Deopt: {
                    const Function& fn = *act.fn;
                    const Checkpoint* cp = fn.checkpoint(in.index);
                    if (!cp) throw std::logic_error("deopt to unknown checkpoint");
                    const Version& base = fn.baseline();
                    std::vector<Value> nregs(base.next_reg);
                    for (size_t k = 0; k < in.args.size(); ++k) nregs[in.deopt_regs[k]] = val(in.args[k]);
                    EnvObj* e = env_ptr(in.env);
                    if (fn.entry_env != kNoReg) nregs[fn.entry_env] = Value::of_env(e);
                    if (act.args) frames_[act.frame].env = e;
                    counters_.deopts_taken++;
                    Activation b{&fn, &base, &base.body, act.args, act.closure, act.frame};
                    return exec(b, nregs, info(base.body).index.at(cp->block), cp->index);
                }
            }
            if (!jumped) ++index;
        }
        if (!jumped) throw std::logic_error("fell off the end of a block");
    }
}

bool truthy(const Value& v) {
    if (v.kind == Value::Kind::Missing) raise(ErrorKind::MissingArgumentUsed, "argument is missing");
    if (v.kind != Value::Kind::Vec) raise(ErrorKind::TypeError, "argument is not interpretable as logical");
    const Vec& x = *v.vec;
    if (x.type == Vec::Type::String || x.type == Vec::Type::Null || x.size() == 0)
        raise(ErrorKind::TypeError, "argument is not interpretable as logical");
    if (std::isnan(x.num[0])) raise(ErrorKind::TypeError, "missing value where TRUE/FALSE needed");
    return x.num[0] != 0;
}

Value binop(BinopKind k, const Value& a, const Value& b) {
    for (const Value* v : {&a, &b}) {
        if (v->kind == Value::Kind::Missing) raise(ErrorKind::MissingArgumentUsed, "argument is missing");
        if (v->kind == Value::Kind::Promise) throw std::logic_error("unforced promise reached Binop");
        if (v->kind != Value::Kind::Vec) raise(ErrorKind::TypeError, "non-numeric argument to binary operator");
    }
    const Vec& x = *a.vec;
    const Vec& y = *b.vec;
    bool strings = x.type == Vec::Type::String || y.type == Vec::Type::String;
    if (strings && !(k == BinopKind::Eq || k == BinopKind::Lt))
        raise(ErrorKind::TypeError, "non-numeric argument to binary operator");
    if (strings && (x.type != Vec::Type::String || y.type != Vec::Type::String) &&
        !(x.type == Vec::Type::Null || y.type == Vec::Type::Null))
        raise(ErrorKind::TypeError, "comparison of string with number");

    if (k == BinopKind::Colon) {
        if (x.size() == 0 || y.size() == 0) raise(ErrorKind::TypeError, "argument of length 0");
        double from = x.num[0], to = y.num[0];
        if (std::isnan(from) || std::isnan(to) || std::isinf(from) || std::isinf(to))
            raise(ErrorKind::TypeError, "NA/NaN argument");
        double n = std::floor(std::fabs(to - from)) + 1;
        if (n > 1e6) raise(ErrorKind::TypeError, "result would be too long a vector");
        Vec r;
        r.type = Vec::Type::Numeric;
        double step = to >= from ? 1 : -1;
        for (double i = 0; i < n; ++i) r.num.push_back(from + step * i);
        return Value::of(std::move(r));
    }

    size_t m = x.size(), n = y.size();
    Vec r;
    bool compare = k == BinopKind::Lt || k == BinopKind::Eq;
    r.type = compare ? Vec::Type::Logical : Vec::Type::Numeric;
    if (m == 0 || n == 0) return Value::of(std::move(r));
    if (!(m == n || m == 1 || n == 1)) raise(ErrorKind::TypeError, "operand lengths differ");
    size_t len = std::max(m, n);
    for (size_t i = 0; i < len; ++i) {
        if (strings) {
            const std::string& s = x.str[i % m];
            const std::string& t = y.str[i % n];
            r.num.push_back(k == BinopKind::Eq ? s == t : s < t);
            continue;
        }
        double p = x.num[i % m], q = y.num[i % n];
        switch (k) {
            case BinopKind::Add: r.num.push_back(p + q); break;
            case BinopKind::Sub: r.num.push_back(p - q); break;
            case BinopKind::Mul: r.num.push_back(p * q); break;
            case BinopKind::Lt: r.num.push_back(p < q); break;
            case BinopKind::Eq: r.num.push_back(p == q); break;
            case BinopKind::Colon: break;
        }
    }
    return Value::of(std::move(r));
}

RunResult Machine::run() {
    RunResult res;
    global_ = new_env(nullptr, false, "R_GlobalEnv");
    for (auto& b : mr::builtin_table()) global_->bindings.push_back(Binding{b.name, Value::of_builtin(b.id)});
    const Function& main = prog_.fn(prog_.entry);
    frames_.push_back(Frame{&main, global_, global_});
    try {
        std::vector<Value> none;
        const Version& ver = select_version(main, none, opt_.selector);
        std::vector<Value> regs(ver.next_reg);
        Activation act{&main, &ver, &ver.body, &none, nullptr, 0};
        Value v = force(exec(act, regs, 0, 0));
        res.ok = true;
        res.value = format_value(v);
        trace_.push_back("EVT result " + res.value);
    } catch (RError& e) {
        res.ok = false;
        res.error = e.kind;
        res.message = e.message;
        trace_.push_back(std::string("EVT error ") + error_kind_name(e.kind));
    }
    res.counters = counters_;
    res.trace = std::move(trace_);
    return res;
}

std::optional<Vec> fold_binop(BinopKind k, const Vec& a, const Vec& b) {
    try {
        Value r = binop(k, Value::of(a), Value::of(b));
        return *r.vec;
    } catch (const RError&) {
        return std::nullopt;
    }
}

std::optional<bool> fold_truthy(const Vec& c) {
    try {
        return truthy(Value::of(c));
    } catch (const RError&) {
        return std::nullopt;
    }
}

RunResult run(const Program& program, const RunOptions& options) {
    Machine m(program, options);
    return m.run();
}

}  // namespace pir
