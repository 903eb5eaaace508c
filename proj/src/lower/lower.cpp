#include "pir/lower.hpp"

#include <deque>
#include <functional>

namespace pir {

using mr::Expr;
using mr::ExprKind;

bool strict_position(const Expr& parent, size_t index) {
    switch (parent.kind) {
        case ExprKind::Call:
            return index == 0;  // the callee; arguments become promises
        case ExprKind::Assign: {
            const Expr& rhs = *parent.kids[0];
            return !(rhs.kind == ExprKind::NumLit || rhs.kind == ExprKind::BoolLit || rhs.kind == ExprKind::StrLit ||
                     rhs.kind == ExprKind::FunDef);
        }
        default:
            return true;
    }
}

namespace {

struct PendingPromise {
    size_t index;  // into Version::promises
    const Expr* expr;
    Operand env;
};

struct PendingFunction {
    std::string id;
    const Expr* def;
    bool nested;
};

class ProgramLowering;

class FunctionLowering {
  public:
    FunctionLowering(ProgramLowering& pl, Function& fn) : pl_(pl), fn_(fn), ver_(fn.versions.front()) {}

    void lower_function(const Expr& def);
    void lower_main(const Expr& body);

  private:
    ProgramLowering& pl_;
    Function& fn_;
    Version& ver_;
    Code* code_ = nullptr;
    int cur_ = 0;
    Operand env_;
    std::deque<PendingPromise> pending_;
    int promise_counter_ = 0;

    Reg emit(Instr in) {
        Reg id = ver_.next_reg++;
        bool value = !(in.op == Op::Branch || in.op == Op::Return || in.op == Op::Deopt || in.op == Op::StVar);
        if (value) {
            in.dst = id;
            in.origin = id;
        }
        code_->blocks[cur_].instrs.push_back(std::move(in));
        return id;
    }

    int new_block() {
        code_->blocks.push_back(BasicBlock{ver_.next_block++, {}});
        return static_cast<int>(code_->blocks.size()) - 1;
    }

    BlockId id_of(int index) const { return code_->blocks[index].id; }

    void branch_to(int target) {
        Instr br(Op::Branch);
        br.targets = {id_of(target)};
        emit(std::move(br));
    }

    Reg constant(const Vec& v) {
        Instr in(Op::LdConst);
        in.constant = v;
        return emit(std::move(in));
    }

    Reg expr(const Expr& e, const std::string& name_hint = "");
    void finish_promises();
};

class ProgramLowering {
  public:
    Program prog;
    std::deque<PendingFunction> queue;
    std::set<std::string> used_names{"main"};

    std::string fresh_function_id(const std::string& hint) {
        std::string base = hint.empty() ? "fun" : hint;
        std::string id = base;
        int k = hint.empty() ? 0 : 1;
        if (hint.empty()) id = base + std::to_string(k++);
        while (used_names.count(id)) id = base + (hint.empty() ? "" : ".") + std::to_string(k++);
        used_names.insert(id);
        return id;
    }

    std::string enqueue(const Expr& def, bool nested, const std::string& hint) {
        std::string id = fresh_function_id(hint);
        queue.push_back({id, &def, nested});
        return id;
    }

    Function& add_function(const std::string& id) {
        Function& f = prog.functions[id];
        f.id = id;
        f.versions.emplace_back();
        prog.order.push_back(id);
        return f;
    }
};

Reg FunctionLowering::expr(const Expr& e, const std::string& name_hint) {
    switch (e.kind) {
        case ExprKind::NumLit:
            return constant(Vec::number(e.num));
        case ExprKind::BoolLit:
            return constant(Vec::logical(e.boolean));
        case ExprKind::StrLit:
            return constant(Vec::string(e.text));
        case ExprKind::Var: {
            Instr ld(Op::LdVar);
            ld.name = e.text;
            ld.env = env_;
            Reg v = emit(std::move(ld));
            Instr f(Op::Force);
            f.args = {Operand::of(v)};
            f.env = env_;
            return emit(std::move(f));
        }
        case ExprKind::Assign: {
            Reg v = expr(*e.kids[0], e.text);
            Instr st(Op::StVar);
            st.name = e.text;
            st.args = {Operand::of(v)};
            st.env = env_;
            emit(std::move(st));
            return v;
        }
        case ExprKind::FunDef: {
            bool nested = !env_.is_global();
            std::string id = pl_.enqueue(e, nested, name_hint);
            Instr mk(Op::MkClosure);
            mk.name = id;
            mk.env = env_;
            return emit(std::move(mk));
        }
        case ExprKind::Call: {
            const Expr& callee = *e.kids[0];
            Reg f;
            if (callee.kind == ExprKind::Var) {
                Instr ld(Op::LdFun);
                ld.name = callee.text;
                ld.env = env_;
                f = emit(std::move(ld));
            } else {
                f = expr(callee);
            }
            Instr call(Op::Call);
            call.args.push_back(Operand::of(f));
            for (size_t i = 1; i < e.kids.size(); ++i) {
                Promise p;
                p.id = "pr" + std::to_string(promise_counter_++);
                p.env = env_;
                ver_.promises.push_back(p);
                pending_.push_back({ver_.promises.size() - 1, e.kids[i].get(), env_});
                Instr mk(Op::MkArg);
                mk.name = p.id;
                mk.env = env_;
                call.args.push_back(Operand::of(emit(std::move(mk))));
            }
            call.env = env_;
            return emit(std::move(call));
        }
        case ExprKind::If: {
            // Instructions are emitted in final layout order so register ids
            // follow flat positions; branch targets are patched afterwards.
            Reg c = expr(*e.kids[0]);
            Instr br(Op::Branch);
            br.args = {Operand::of(c)};
            br.targets = {0, 0};
            emit(std::move(br));
            Instr* cond_br = &code_->blocks[cur_].instrs.back();
            size_t cond_block = cur_;
            int then_b = new_block();
            cur_ = then_b;
            Reg tv = expr(*e.kids[1]);
            int then_end = cur_;
            branch_to(0);
            int else_b = new_block();
            cur_ = else_b;
            Reg ev = e.kids.size() == 3 ? expr(*e.kids[2]) : constant(Vec::null());
            int else_end = cur_;
            branch_to(0);
            int join = new_block();
            cond_br = &code_->blocks[cond_block].instrs.back();
            cond_br->targets = {id_of(then_b), id_of(else_b)};
            code_->blocks[then_end].instrs.back().targets = {id_of(join)};
            code_->blocks[else_end].instrs.back().targets = {id_of(join)};
            cur_ = join;
            Instr phi(Op::Phi);
            phi.args = {Operand::of(tv), Operand::of(ev)};
            phi.targets = {id_of(then_end), id_of(else_end)};
            return emit(std::move(phi));
        }
        case ExprKind::While: {
            int entry_block = cur_;
            branch_to(0);
            int header = new_block();
            code_->blocks[entry_block].instrs.back().targets = {id_of(header)};
            cur_ = header;
            Reg c = expr(*e.kids[0]);
            int header_end = cur_;
            Instr br(Op::Branch);
            br.args = {Operand::of(c)};
            br.targets = {0, 0};
            emit(std::move(br));
            int body = new_block();
            cur_ = body;
            expr(*e.kids[1]);
            branch_to(header);
            int exit = new_block();
            code_->blocks[header_end].instrs.back().targets = {id_of(body), id_of(exit)};
            cur_ = exit;
            return constant(Vec::null());
        }
        case ExprKind::Block: {
            if (e.kids.empty()) return constant(Vec::null());
            Reg last = kNoReg;
            for (auto& k : e.kids) last = expr(*k);
            return last;
        }
        case ExprKind::Binop: {
            Reg a = expr(*e.kids[0]);
            Reg b = expr(*e.kids[1]);
            Instr bin(Op::Binop);
            bin.binop = e.op;
            bin.args = {Operand::of(a), Operand::of(b)};
            bin.env = env_;
            return emit(std::move(bin));
        }
    }
    return kNoReg;
}

void FunctionLowering::finish_promises() {
    while (!pending_.empty()) {
        PendingPromise p = pending_.front();
        pending_.pop_front();
        Code body;
        body.blocks.push_back(BasicBlock{ver_.next_block++, {}});
        code_ = &body;
        cur_ = 0;
        env_ = p.env;
        Reg v = expr(*p.expr);
        Instr ret(Op::Return);
        ret.args = {Operand::of(v)};
        emit(std::move(ret));
        ver_.promises[p.index].code = std::move(body);
    }
}

void FunctionLowering::lower_function(const Expr& def) {
    code_ = &ver_.body;
    code_->blocks.push_back(BasicBlock{ver_.next_block++, {}});
    cur_ = 0;
    std::vector<Reg> args;
    for (size_t i = 0; i < def.params.size(); ++i) {
        Instr ld(Op::LdArg);
        ld.index = static_cast<int>(i);
        args.push_back(emit(std::move(ld)));
    }
    Instr mk(Op::MkEnv);
    for (size_t i = 0; i < def.params.size(); ++i) {
        mk.names.push_back(def.params[i]);
        mk.args.push_back(Operand::of(args[i]));
    }
    mk.env = fn_.nested ? Operand::open() : Operand::global();
    Reg e = emit(std::move(mk));
    fn_.entry_env = e;
    env_ = Operand::of(e);
    Reg v = expr(*def.kids[0]);
    Instr ret(Op::Return);
    ret.args = {Operand::of(v)};
    emit(std::move(ret));
    finish_promises();
}

void FunctionLowering::lower_main(const Expr& body) {
    code_ = &ver_.body;
    code_->blocks.push_back(BasicBlock{ver_.next_block++, {}});
    cur_ = 0;
    env_ = Operand::global();
    Reg v = expr(body);
    Instr ret(Op::Return);
    ret.args = {Operand::of(v)};
    emit(std::move(ret));
    finish_promises();
}

bool mentions_reflective_writer(const Expr& e) {
    if ((e.kind == ExprKind::Var || e.kind == ExprKind::StrLit || e.kind == ExprKind::Assign) &&
        (e.text == "assign" || e.text == "rm"))
        return true;
    for (auto& k : e.kids)
        if (mentions_reflective_writer(*k)) return true;
    return false;
}

void compute_stable_globals(Program& prog, const Expr& ast) {
    if (mentions_reflective_writer(ast)) return;
    const Function& main = prog.fn(prog.entry);
    std::map<std::string, int> stores;
    std::map<std::string, std::string> target;
    std::map<Reg, std::string> closures;
    // Only bindings made by the entry block before anything can call out are
    // guaranteed to be in place whenever another function runs.
    auto scan = [&](const Code& c, bool early_block) {
        bool early = early_block;
        for (auto& b : c.blocks) {
            for (auto& in : b.instrs) {
                if (in.op == Op::Call || in.op == Op::LdFun) early = false;
                if (in.op == Op::MkClosure && in.env.is_global()) closures[in.dst] = in.name;
                if (in.op == Op::StVar && in.env.is_global()) {
                    stores[in.name]++;
                    auto it = in.args[0].is_reg() ? closures.find(in.args[0].reg) : closures.end();
                    target[in.name] = early && it != closures.end() ? it->second : "";
                }
            }
            early = false;
        }
    };
    scan(main.baseline().body, true);
    for (auto& p : main.baseline().promises) scan(p.code, false);
    for (auto& [name, n] : stores)
        if (n == 1 && !target[name].empty()) prog.stable_globals[name] = target[name];
}

}  // namespace

Program lower_program(const Expr& ast) {
    ProgramLowering pl;
    pl.prog.entry = "main";
    {
        Function& main = pl.add_function("main");
        main.top_level = true;
        FunctionLowering fl(pl, main);
        fl.lower_main(ast);
        main.checkpoints = emit_checkpoints(main.baseline().body, kNoReg);
    }
    while (!pl.queue.empty()) {
        PendingFunction pf = pl.queue.front();
        pl.queue.pop_front();
        Function& f = pl.add_function(pf.id);
        f.params = pf.def->params;
        f.nested = pf.nested;
        FunctionLowering fl(pl, f);
        fl.lower_function(*pf.def);
        f.checkpoints = emit_checkpoints(f.baseline().body, f.entry_env);
    }
    compute_stable_globals(pl.prog, ast);
    return std::move(pl.prog);
}

Program compile_source(const std::string& source) {
    auto ast = mr::parse(source);
    return lower_program(*ast);
}

}  // namespace pir
