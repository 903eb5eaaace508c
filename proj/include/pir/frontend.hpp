#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mr {

enum class BinopKind { Add, Sub, Mul, Lt, Eq, Colon };

const char* binop_name(BinopKind k);    // "Add", ...
const char* binop_symbol(BinopKind k);  // "+", ...

enum class ExprKind { NumLit, BoolLit, StrLit, Var, Assign, FunDef, Call, If, While, Block, Binop };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    ExprKind kind;
    int node_id = -1;
    int line = 0;
    int col = 0;

    double num = 0;           // NumLit
    bool boolean = false;     // BoolLit
    std::string text;         // Var / Assign target / StrLit
    BinopKind op = BinopKind::Add;
    std::vector<std::string> params;  // FunDef
    // Children by kind:
    //   Assign: [rhs]; FunDef: [body]; Call: [callee, args...]
    //   If: [cond, then] or [cond, then, else]; While: [cond, body]
    //   Block: statements; Binop: [lhs, rhs]
    std::vector<ExprPtr> kids;

    explicit Expr(ExprKind k) : kind(k) {}
    ExprPtr clone() const;
};

/// Structural equality including node ids.
bool equal(const Expr& a, const Expr& b);

class SyntaxError : public std::runtime_error {
  public:
    SyntaxError(const std::string& msg, int line, int col);
    int line, col;
};

/// Parses a whole program; the result is always a Block.
ExprPtr parse(const std::string& source);

/// Reassigns node ids in pre-order starting at 0.
void number_nodes(Expr& root);

/// Prints concrete syntax that parses back to the same tree.
std::string print(const Expr& e);

bool is_reserved(const std::string& name);

/// Shortest text that reads back as the same double ("42", "0.1", "1e+20").
std::string format_double(double v);

enum class BuiltinId { C, Get, Assign, Rm, Environment, ParentFrame, SysFrame };

struct BuiltinDesc {
    BuiltinId id;
    std::string name;
    int arity;  // -1 for variadic
    bool strict;
};

const std::vector<BuiltinDesc>& builtin_table();
const BuiltinDesc* find_builtin(const std::string& name);

}  // namespace mr
