#include <charconv>
#include <cmath>
#include <sstream>

#include "pir/frontend.hpp"

namespace mr {

const char* binop_name(BinopKind k) {
    switch (k) {
        case BinopKind::Add: return "Add";
        case BinopKind::Sub: return "Sub";
        case BinopKind::Mul: return "Mul";
        case BinopKind::Lt: return "Lt";
        case BinopKind::Eq: return "Eq";
        case BinopKind::Colon: return "Colon";
    }
    return "?";
}

const char* binop_symbol(BinopKind k) {
    switch (k) {
        case BinopKind::Add: return "+";
        case BinopKind::Sub: return "-";
        case BinopKind::Mul: return "*";
        case BinopKind::Lt: return "<";
        case BinopKind::Eq: return "==";
        case BinopKind::Colon: return ":";
    }
    return "?";
}

ExprPtr Expr::clone() const {
    auto e = std::make_unique<Expr>(kind);
    e->node_id = node_id;
    e->line = line;
    e->col = col;
    e->num = num;
    e->boolean = boolean;
    e->text = text;
    e->op = op;
    e->params = params;
    for (auto& k : kids) e->kids.push_back(k->clone());
    return e;
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.node_id != b.node_id || a.kids.size() != b.kids.size()) return false;
    switch (a.kind) {
        case ExprKind::NumLit:
            if (!(a.num == b.num || (std::isnan(a.num) && std::isnan(b.num)))) return false;
            break;
        case ExprKind::BoolLit:
            if (a.boolean != b.boolean) return false;
            break;
        case ExprKind::StrLit:
        case ExprKind::Var:
        case ExprKind::Assign:
            if (a.text != b.text) return false;
            break;
        case ExprKind::FunDef:
            if (a.params != b.params) return false;
            break;
        case ExprKind::Binop:
            if (a.op != b.op) return false;
            break;
        default:
            break;
    }
    for (size_t i = 0; i < a.kids.size(); ++i)
        if (!equal(*a.kids[i], *b.kids[i])) return false;
    return true;
}

namespace {

void number(Expr& e, int& next) {
    e.node_id = next++;
    for (auto& k : e.kids) number(*k, next);
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

void print_to(std::ostringstream& os, const Expr& e) {
    switch (e.kind) {
        case ExprKind::NumLit:
            os << format_double(e.num);
            return;
        case ExprKind::BoolLit:
            os << (e.boolean ? "TRUE" : "FALSE");
            return;
        case ExprKind::StrLit:
            os << quote(e.text);
            return;
        case ExprKind::Var:
            os << e.text;
            return;
        case ExprKind::Assign:
            os << e.text << " <- ";
            print_to(os, *e.kids[0]);
            return;
        case ExprKind::FunDef:
            os << "function(";
            for (size_t i = 0; i < e.params.size(); ++i) os << (i ? ", " : "") << e.params[i];
            os << ") (";
            print_to(os, *e.kids[0]);
            os << ")";
            return;
        case ExprKind::Call:
            if (e.kids[0]->kind == ExprKind::Var) {
                os << e.kids[0]->text;
            } else {
                os << "(";
                print_to(os, *e.kids[0]);
                os << ")";
            }
            os << "(";
            for (size_t i = 1; i < e.kids.size(); ++i) {
                if (i > 1) os << ", ";
                print_to(os, *e.kids[i]);
            }
            os << ")";
            return;
        case ExprKind::If:
            os << "if (";
            print_to(os, *e.kids[0]);
            os << ") (";
            print_to(os, *e.kids[1]);
            os << ")";
            if (e.kids.size() == 3) {
                os << " else (";
                print_to(os, *e.kids[2]);
                os << ")";
            }
            return;
        case ExprKind::While:
            os << "while (";
            print_to(os, *e.kids[0]);
            os << ") (";
            print_to(os, *e.kids[1]);
            os << ")";
            return;
        case ExprKind::Block:
            os << "{";
            for (size_t i = 0; i < e.kids.size(); ++i) {
                os << (i ? "; " : " ");
                print_to(os, *e.kids[i]);
            }
            os << " }";
            return;
        case ExprKind::Binop: {
            // if/while/function/assign on the left would swallow the operator
            const Expr& lhs = *e.kids[0];
            bool greedy = lhs.kind == ExprKind::If || lhs.kind == ExprKind::While ||
                          lhs.kind == ExprKind::FunDef || lhs.kind == ExprKind::Assign;
            os << "(";
            if (greedy) os << "(";
            print_to(os, lhs);
            if (greedy) os << ")";
            os << " " << binop_symbol(e.op) << " ";
            print_to(os, *e.kids[1]);
            os << ")";
            return;
        }
    }
}

}  // namespace

void number_nodes(Expr& root) {
    int next = 0;
    number(root, next);
}

std::string print(const Expr& e) {
    std::ostringstream os;
    if (e.kind == ExprKind::Block) {
        // Top-level programs print as one statement per line.
        for (auto& k : e.kids) {
            print_to(os, *k);
            os << "\n";
        }
        return os.str();
    }
    print_to(os, e);
    return os.str();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    if (v == 0) return std::signbit(v) ? "0" : "0";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

bool is_reserved(const std::string& name) {
    return name == "function" || name == "if" || name == "else" || name == "while" || name == "TRUE" ||
           name == "FALSE";
}

const std::vector<BuiltinDesc>& builtin_table() {
    static const std::vector<BuiltinDesc> table = {
        {BuiltinId::C, "c", -1, true},
        {BuiltinId::Get, "get", 2, true},
        {BuiltinId::Assign, "assign", 3, true},
        {BuiltinId::Rm, "rm", 2, true},
        {BuiltinId::Environment, "environment", 0, true},
        {BuiltinId::ParentFrame, "parent.frame", 0, true},
        {BuiltinId::SysFrame, "sys.frame", 1, true},
    };
    return table;
}

const BuiltinDesc* find_builtin(const std::string& name) {
    for (auto& b : builtin_table())
        if (b.name == name) return &b;
    return nullptr;
}

}  // namespace mr
