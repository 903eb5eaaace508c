#include "pir/text.hpp"

#include <cctype>
#include <cstring>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pir {

IrParseError::IrParseError(const std::string& msg, int l)
    : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}

namespace {

std::string reg_text(Reg r, const std::set<Reg>& envs) {
    return (envs.count(r) ? "e" : "%") + std::to_string(r);
}

std::string operand_text(const Operand& a, const std::set<Reg>& envs) {
    switch (a.kind) {
        case Operand::Kind::Reg: return reg_text(a.reg, envs);
        case Operand::Kind::Global: return "G";
        case Operand::Kind::Open: return "O";
        case Operand::Kind::Missing: return "_";
    }
    return "?";
}

}  // namespace

std::string print_instr(const Instr& in, const std::set<Reg>& envs) {
    auto op = [&](const Operand& a) { return operand_text(a, envs); };
    std::ostringstream os;
    if (in.dst != kNoReg) os << reg_text(in.dst, envs) << " = ";
    switch (in.op) {
        case Op::Binop:
            os << mr::binop_name(in.binop) << "(" << op(in.args[0]) << ", " << op(in.args[1]) << ") " << op(in.env);
            break;
        case Op::Branch:
            if (in.args.empty()) {
                os << "Branch BB" << in.targets[0];
            } else {
                os << "Branch(" << op(in.args[0]) << ", BB" << in.targets[0] << ", BB" << in.targets[1] << ")";
            }
            break;
        case Op::Call:
            os << "Call " << op(in.args[0]) << " (";
            for (size_t i = 1; i < in.args.size(); ++i) os << (i > 1 ? ", " : "") << op(in.args[i]);
            os << ") " << op(in.env);
            break;
        case Op::Deopt:
            os << "Deopt(cp" << in.index;
            for (size_t i = 0; i < in.args.size(); ++i) os << ", %" << in.deopt_regs[i] << "=" << op(in.args[i]);
            os << ", " << op(in.env) << ")";
            break;
        case Op::Force:
            os << "Force(" << op(in.args[0]) << ") " << op(in.env);
            break;
        case Op::LdArg:
            os << "LdArg(" << in.index << ")";
            break;
        case Op::LdConst:
            os << "LdConst " << format_vec_ir(in.constant);
            break;
        case Op::LdFun:
        case Op::LdVar:
        case Op::MkArg:
        case Op::MkClosure:
            os << op_name(in.op) << "(" << in.name << ", " << op(in.env) << ")";
            break;
        case Op::MkEnv:
            os << "MkEnv(";
            for (size_t i = 0; i < in.args.size(); ++i)
                os << (i ? ", " : "") << in.names[i] << "=" << op(in.args[i]);
            os << (in.args.empty() ? ": " : " : ") << op(in.env) << ")";
            if (in.stub) os << " stub";
            break;
        case Op::Phi:
            os << "Phi(";
            for (size_t i = 0; i < in.args.size(); ++i)
                os << (i ? ", " : "") << "BB" << in.targets[i] << ":" << op(in.args[i]);
            os << ")";
            break;
        case Op::Return:
            os << "Return(" << op(in.args[0]) << ")";
            break;
        case Op::StVar:
            os << "StVar(" << in.name << ", " << op(in.args[0]) << ", " << op(in.env) << ")";
            break;
        case Op::IsMaterialized:
            os << "IsMaterialized(" << op(in.env) << ")";
            break;
    }
    return os.str();
}

std::string print_code(const Code& c, const std::set<Reg>& envs, const std::string& indent) {
    std::ostringstream os;
    bool headers = !(c.blocks.size() == 1 && c.blocks[0].id == 0);
    for (auto& b : c.blocks) {
        if (headers) os << "BB" << b.id << ":\n";
        for (auto& in : b.instrs) os << indent << print_instr(in, envs) << "\n";
    }
    return os.str();
}

std::set<Reg> env_registers(const Version& v) {
    std::set<Reg> envs;
    auto scan = [&](const Code& c) {
        for (auto& b : c.blocks)
            for (auto& in : b.instrs)
                if (in.op == Op::MkEnv) envs.insert(in.dst);
    };
    scan(v.body);
    for (auto& p : v.promises) {
        scan(p.code);
        if (p.env.is_reg()) envs.insert(p.env.reg);
    }
    return envs;
}

std::string print_ir(const Version& v) {
    auto envs = env_registers(v);
    std::ostringstream os;
    if (!v.assumptions.empty()) {
        os << "assume ";
        bool first = true;
        for (auto a : v.assumptions) {
            os << (first ? "" : ", ") << assumption_name(a);
            first = false;
        }
        os << "\n";
    }
    os << print_code(v.body, envs);
    for (auto& p : v.promises) {
        os << "promise " << p.id << "(" << operand_text(p.env, envs) << "):\n";
        os << print_code(p.code, envs);
    }
    return os.str();
}

std::string print_program(const Program& p) {
    std::ostringstream os;
    for (auto& id : p.order) {
        const Function& f = p.fn(id);
        os << "function " << f.id << "(";
        for (size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << f.params[i];
        os << ")\n";
        for (size_t v = 0; v < f.versions.size(); ++v) {
            os << "version " << v << (v == 0 ? " (baseline)" : "") << "\n";
            os << print_ir(f.versions[v]);
        }
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- parsing

namespace {

struct Tk {
    enum Kind { Word, Str, Punct, End } kind;
    std::string text;
};

std::vector<Tk> tokenize(const std::string& line, int lineno) {
    std::vector<Tk> out;
    size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '"') {
            std::string s;
            ++i;
            while (i < line.size() && line[i] != '"') {
                if (line[i] == '\\' && i + 1 < line.size()) {
                    char e = line[i + 1];
                    s += e == 'n' ? '\n' : e;
                    i += 2;
                    continue;
                }
                s += line[i++];
            }
            if (i >= line.size()) throw IrParseError("unterminated string", lineno);
            ++i;
            out.push_back({Tk::Str, s});
            continue;
        }
        if (std::strchr("(),=:[]", c)) {
            out.push_back({Tk::Punct, std::string(1, c)});
            ++i;
            continue;
        }
        size_t j = i;
        while (j < line.size()) {
            char d = line[j];
            if (std::isalnum(static_cast<unsigned char>(d)) || d == '%' || d == '.' || d == '_' || d == '-' ||
                d == '+')
                ++j;
            else
                break;
        }
        if (j == i) throw IrParseError(std::string("unexpected character '") + c + "'", lineno);
        out.push_back({Tk::Word, line.substr(i, j - i)});
        i = j;
    }
    out.push_back({Tk::End, ""});
    return out;
}

class LineParser {
  public:
    LineParser(std::vector<Tk> t, int line) : t_(std::move(t)), line_(line) {}

    [[noreturn]] void fail(const std::string& m) { throw IrParseError(m, line_); }

    const Tk& peek() const { return t_[p_]; }
    bool punct(const char* s) const { return peek().kind == Tk::Punct && peek().text == s; }
    bool end() const { return peek().kind == Tk::End; }

    void expect(const char* s) {
        if (!punct(s)) fail(std::string("expected '") + s + "', found '" + peek().text + "'");
        ++p_;
    }

    std::string word() {
        if (peek().kind != Tk::Word) fail("expected a word, found '" + peek().text + "'");
        return t_[p_++].text;
    }

    static bool is_num(const std::string& s, size_t from) {
        if (from >= s.size()) return false;
        for (size_t i = from; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    }

    Reg reg(const std::string& w, std::set<Reg>* envs = nullptr) {
        if (w.size() > 1 && (w[0] == '%' || w[0] == 'e') && is_num(w, 1)) {
            if (w[0] == 'e' && envs) envs->insert(std::stoi(w.substr(1)));
            return std::stoi(w.substr(1));
        }
        fail("expected a register, found '" + w + "'");
    }

    Operand operand() {
        std::string w = word();
        if (w == "G") return Operand::global();
        if (w == "O") return Operand::open();
        if (w == "_") return Operand::missing();
        return Operand::of(reg(w));
    }

    BlockId label(const std::string& w) {
        if (w.size() > 2 && w.compare(0, 2, "BB") == 0 && is_num(w, 2)) return std::stoi(w.substr(2));
        fail("expected a block label, found '" + w + "'");
    }

    double number(const std::string& w) {
        if (w == "NaN") return std::nan("");
        if (w == "Inf") return INFINITY;
        if (w == "-Inf") return -INFINITY;
        double v = 0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || ptr != w.data() + w.size()) fail("bad number '" + w + "'");
        return v;
    }

    Vec constant() {
        if (peek().kind == Tk::Word && peek().text == "NULL") {
            ++p_;
            return Vec::null();
        }
        expect("[");
        std::string n = word();
        expect("]");
        size_t count = std::stoul(n);
        Vec v;
        if (count == 0) {
            std::string ty = word();
            v.type = ty == "logical" ? Vec::Type::Logical : ty == "character" ? Vec::Type::String : Vec::Type::Numeric;
            return v;
        }
        for (size_t i = 0; i < count; ++i) {
            if (peek().kind == Tk::Str) {
                v.type = Vec::Type::String;
                v.str.push_back(t_[p_++].text);
                continue;
            }
            std::string w = word();
            if (w == "TRUE" || w == "FALSE") {
                v.type = Vec::Type::Logical;
                v.num.push_back(w == "TRUE");
            } else {
                v.type = Vec::Type::Numeric;
                v.num.push_back(number(w));
            }
        }
        return v;
    }

    Instr instr() {
        Reg dst = kNoReg;
        bool env_dst = false;
        if (peek().kind == Tk::Word && t_[p_ + 1].kind == Tk::Punct && t_[p_ + 1].text == "=") {
            std::string w = word();
            env_dst = w[0] == 'e';
            dst = reg(w);
            expect("=");
        }
        std::string name = word();
        Instr in(Op::Return);
        static const std::pair<const char*, BinopKind> binops[] = {
            {"Add", BinopKind::Add}, {"Sub", BinopKind::Sub}, {"Mul", BinopKind::Mul},
            {"Lt", BinopKind::Lt},   {"Eq", BinopKind::Eq},   {"Colon", BinopKind::Colon}};
        bool done = false;
        for (auto& [n, k] : binops) {
            if (name == n) {
                in.op = Op::Binop;
                in.binop = k;
                expect("(");
                in.args.push_back(operand());
                expect(",");
                in.args.push_back(operand());
                expect(")");
                in.env = operand();
                done = true;
            }
        }
        if (done) {
        } else if (name == "Branch") {
            in.op = Op::Branch;
            if (punct("(")) {
                expect("(");
                in.args.push_back(operand());
                expect(",");
                in.targets.push_back(label(word()));
                expect(",");
                in.targets.push_back(label(word()));
                expect(")");
            } else {
                in.targets.push_back(label(word()));
            }
        } else if (name == "Call") {
            in.op = Op::Call;
            in.args.push_back(operand());
            expect("(");
            while (!punct(")")) {
                in.args.push_back(operand());
                if (punct(",")) expect(",");
            }
            expect(")");
            in.env = operand();
        } else if (name == "Deopt") {
            in.op = Op::Deopt;
            expect("(");
            std::string cp = word();
            if (cp.size() < 3 || cp.compare(0, 2, "cp") != 0 || !is_num(cp, 2)) fail("expected checkpoint id");
            in.index = std::stoi(cp.substr(2));
            while (true) {
                expect(",");
                if (t_[p_ + 1].kind == Tk::Punct && t_[p_ + 1].text == "=") {
                    in.deopt_regs.push_back(reg(word()));
                    expect("=");
                    in.args.push_back(operand());
                } else {
                    in.env = operand();
                    break;
                }
            }
            expect(")");
        } else if (name == "Force") {
            in.op = Op::Force;
            expect("(");
            in.args.push_back(operand());
            expect(")");
            in.env = operand();
        } else if (name == "LdArg") {
            in.op = Op::LdArg;
            expect("(");
            in.index = std::stoi(word());
            expect(")");
        } else if (name == "LdConst") {
            in.op = Op::LdConst;
            in.constant = constant();
        } else if (name == "LdFun" || name == "LdVar" || name == "MkArg" || name == "MkClosure") {
            in.op = name == "LdFun" ? Op::LdFun : name == "LdVar" ? Op::LdVar : name == "MkArg" ? Op::MkArg : Op::MkClosure;
            expect("(");
            in.name = word();
            expect(",");
            in.env = operand();
            expect(")");
        } else if (name == "MkEnv") {
            in.op = Op::MkEnv;
            expect("(");
            while (!punct(":")) {
                in.names.push_back(word());
                expect("=");
                in.args.push_back(operand());
                if (punct(",")) expect(",");
            }
            expect(":");
            in.env = operand();
            expect(")");
            if (peek().kind == Tk::Word && peek().text == "stub") {
                ++p_;
                in.stub = true;
            }
        } else if (name == "Phi") {
            in.op = Op::Phi;
            expect("(");
            while (!punct(")")) {
                in.targets.push_back(label(word()));
                expect(":");
                in.args.push_back(operand());
                if (punct(",")) expect(",");
            }
            expect(")");
        } else if (name == "Return") {
            in.op = Op::Return;
            expect("(");
            in.args.push_back(operand());
            expect(")");
        } else if (name == "StVar") {
            in.op = Op::StVar;
            expect("(");
            in.name = word();
            expect(",");
            in.args.push_back(operand());
            expect(",");
            in.env = operand();
            expect(")");
        } else if (name == "IsMaterialized") {
            in.op = Op::IsMaterialized;
            expect("(");
            in.env = operand();
            expect(")");
        } else {
            fail("unknown instruction '" + name + "'");
        }
        if (!end()) fail("trailing text '" + peek().text + "'");
        bool void_op = in.op == Op::Branch || in.op == Op::Return || in.op == Op::Deopt || in.op == Op::StVar;
        if (void_op && dst != kNoReg) fail(std::string(op_name(in.op)) + " produces no value");
        if (!void_op && dst == kNoReg) fail(std::string(op_name(in.op)) + " needs a result register");
        if (env_dst != (in.op == Op::MkEnv)) fail("register flavor does not match instruction");
        in.dst = dst;
        return in;
    }

    Operand promise_header(std::string& id) {
        word();  // "promise"
        id = word();
        expect("(");
        Operand env = operand();
        expect(")");
        expect(":");
        if (!end()) fail("trailing text after promise header");
        return env;
    }

  private:
    std::vector<Tk> t_;
    size_t p_ = 0;
    int line_;
};

}  // namespace

Version parse_ir(const std::string& text) {
    Version v;
    Code* code = &v.body;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto current_block = [&]() -> BasicBlock& {
        if (code->blocks.empty()) code->blocks.push_back(BasicBlock{0, {}});
        return code->blocks.back();
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find("//");
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = tokenize(line, lineno);
        if (toks.size() == 1) continue;
        LineParser lp(toks, lineno);
        const std::string& first = toks[0].text;
        if (toks[0].kind == Tk::Word && first == "assume") {
            lp.word();
            while (!lp.end()) {
                std::string a = lp.word();
                if (a == "EagerArgs")
                    v.assumptions.insert(Assumption::EagerArgs);
                else if (a == "NoReflectiveWrite")
                    v.assumptions.insert(Assumption::NoReflectiveWrite);
                else
                    lp.fail("unknown assumption '" + a + "'");
                if (lp.punct(",")) lp.expect(",");
            }
            continue;
        }
        if (toks[0].kind == Tk::Word && first == "promise") {
            Promise p;
            p.env = lp.promise_header(p.id);
            if (v.promise(p.id)) throw IrParseError("duplicate promise " + p.id, lineno);
            v.promises.push_back(std::move(p));
            code = &v.promises.back().code;
            continue;
        }
        if (toks.size() == 3 && toks[0].kind == Tk::Word && toks[1].kind == Tk::Punct && toks[1].text == ":" &&
            first.compare(0, 2, "BB") == 0) {
            BlockId id = lp.label(first);
            code->blocks.push_back(BasicBlock{id, {}});
            continue;
        }
        current_block().instrs.push_back(lp.instr());
    }
    v.renumber_counters();
    return v;
}

}  // namespace pir
