#include <set>

#include "lexer.hpp"
#include "pir/frontend.hpp"

namespace mr {

SyntaxError::SyntaxError(const std::string& msg, int l, int c)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}

namespace {

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ExprPtr program() {
        auto block = node(ExprKind::Block, peek());
        statements(block->kids, Tok::End);
        expect(Tok::End, "end of input");
        return block;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& peek() const { return toks_[pos_]; }
    bool at(Tok k) const { return peek().kind == k; }
    const Token& next() { return toks_[pos_++]; }

    void skip_nl() {
        while (at(Tok::Newline)) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg, const Token& t) { throw SyntaxError(msg, t.line, t.col); }

    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what + ", found '" + peek().text + "'", peek());
        return next();
    }

    static ExprPtr node(ExprKind k, const Token& t) {
        auto e = std::make_unique<Expr>(k);
        e->line = t.line;
        e->col = t.col;
        return e;
    }

    void statements(std::vector<ExprPtr>& out, Tok close) {
        while (true) {
            while (at(Tok::Newline) || at(Tok::Semi)) ++pos_;
            if (at(close)) return;
            out.push_back(expr());
            if (!at(Tok::Newline) && !at(Tok::Semi) && !at(close))
                fail("unexpected '" + peek().text + "' after expression", peek());
        }
    }

    ExprPtr expr() {
        auto lhs = comparison();
        if (!at(Tok::Arrow)) return lhs;
        const Token& arrow = next();
        if (lhs->kind != ExprKind::Var) {
            if (lhs->kind == ExprKind::BoolLit) fail("reserved word used as variable name", arrow);
            fail("invalid assignment target", arrow);
        }
        skip_nl();
        auto a = node(ExprKind::Assign, toks_[pos_ - 1]);
        a->line = lhs->line;
        a->col = lhs->col;
        a->text = lhs->text;
        a->kids.push_back(expr());
        return a;
    }

    ExprPtr binary(ExprPtr lhs, BinopKind op, ExprPtr rhs) {
        auto b = std::make_unique<Expr>(ExprKind::Binop);
        b->line = lhs->line;
        b->col = lhs->col;
        b->op = op;
        b->kids.push_back(std::move(lhs));
        b->kids.push_back(std::move(rhs));
        return b;
    }

    ExprPtr comparison() {
        auto lhs = additive();
        while (at(Tok::EqEq) || at(Tok::Lt)) {
            BinopKind op = next().kind == Tok::EqEq ? BinopKind::Eq : BinopKind::Lt;
            skip_nl();
            lhs = binary(std::move(lhs), op, additive());
        }
        return lhs;
    }

    ExprPtr additive() {
        auto lhs = multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinopKind op = next().kind == Tok::Plus ? BinopKind::Add : BinopKind::Sub;
            skip_nl();
            lhs = binary(std::move(lhs), op, multiplicative());
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        auto lhs = colon();
        while (at(Tok::Star)) {
            next();
            skip_nl();
            lhs = binary(std::move(lhs), BinopKind::Mul, colon());
        }
        return lhs;
    }

    ExprPtr colon() {
        auto lhs = prefix();
        while (at(Tok::Colon)) {
            next();
            skip_nl();
            lhs = binary(std::move(lhs), BinopKind::Colon, prefix());
        }
        return lhs;
    }

    ExprPtr prefix() {
        if (!at(Tok::Minus)) return postfix();
        const Token& minus = next();
        auto operand = prefix();
        if (operand->kind == ExprKind::NumLit) {
            operand->num = -operand->num;
            operand->line = minus.line;
            operand->col = minus.col;
            return operand;
        }
        auto zero = node(ExprKind::NumLit, minus);
        return binary(std::move(zero), BinopKind::Sub, std::move(operand));
    }

    ExprPtr postfix() {
        auto e = primary();
        while (at(Tok::LParen)) {
            const Token& lp = next();
            auto call = node(ExprKind::Call, lp);
            call->line = e->line;
            call->col = e->col;
            call->kids.push_back(std::move(e));
            skip_nl();
            if (!at(Tok::RParen)) {
                while (true) {
                    skip_nl();
                    call->kids.push_back(expr());
                    skip_nl();
                    if (at(Tok::Comma)) {
                        next();
                        continue;
                    }
                    break;
                }
            }
            expect(Tok::RParen, "')'");
            e = std::move(call);
        }
        return e;
    }

    ExprPtr paren_cond() {
        expect(Tok::LParen, "'('");
        skip_nl();
        auto c = expr();
        skip_nl();
        expect(Tok::RParen, "')'");
        skip_nl();
        return c;
    }

    void reserved_check(const Token& t) {
        size_t save = pos_;
        ++pos_;
        bool assign = at(Tok::Arrow);
        pos_ = save;
        if (assign) fail("reserved word '" + t.text + "' used as variable name", t);
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Num: {
                next();
                auto e = node(ExprKind::NumLit, t);
                e->num = t.num;
                return e;
            }
            case Tok::Str: {
                next();
                auto e = node(ExprKind::StrLit, t);
                e->text = t.text;
                return e;
            }
            case Tok::True:
            case Tok::False: {
                reserved_check(t);
                next();
                auto e = node(ExprKind::BoolLit, t);
                e->boolean = t.kind == Tok::True;
                return e;
            }
            case Tok::Ident: {
                next();
                auto e = node(ExprKind::Var, t);
                e->text = t.text;
                return e;
            }
            case Tok::LParen: {
                next();
                skip_nl();
                auto e = expr();
                skip_nl();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::LBrace: {
                next();
                auto b = node(ExprKind::Block, t);
                statements(b->kids, Tok::RBrace);
                expect(Tok::RBrace, "'}'");
                return b;
            }
            case Tok::Function: {
                reserved_check(t);
                next();
                auto f = node(ExprKind::FunDef, t);
                expect(Tok::LParen, "'('");
                skip_nl();
                std::set<std::string> seen;
                if (!at(Tok::RParen)) {
                    while (true) {
                        skip_nl();
                        const Token& p = peek();
                        if (p.kind != Tok::Ident) {
                            if (p.kind >= Tok::True && p.kind <= Tok::While)
                                fail("reserved word '" + p.text + "' used as parameter name", p);
                            fail("expected parameter name", p);
                        }
                        next();
                        if (!seen.insert(p.text).second) fail("duplicate parameter '" + p.text + "'", p);
                        f->params.push_back(p.text);
                        skip_nl();
                        if (at(Tok::Comma)) {
                            next();
                            continue;
                        }
                        break;
                    }
                }
                expect(Tok::RParen, "')'");
                skip_nl();
                f->kids.push_back(expr());
                return f;
            }
            case Tok::If: {
                reserved_check(t);
                next();
                auto e = node(ExprKind::If, t);
                e->kids.push_back(paren_cond());
                e->kids.push_back(expr());
                size_t save = pos_;
                skip_nl();
                if (at(Tok::Else)) {
                    next();
                    skip_nl();
                    e->kids.push_back(expr());
                } else {
                    pos_ = save;
                }
                return e;
            }
            case Tok::While: {
                reserved_check(t);
                next();
                auto e = node(ExprKind::While, t);
                e->kids.push_back(paren_cond());
                e->kids.push_back(expr());
                return e;
            }
            case Tok::Else:
                fail("unexpected 'else'", t);
            default:
                fail("unexpected '" + t.text + "'", t);
        }
    }
};

}  // namespace

ExprPtr parse(const std::string& source) {
    Parser p(lex(source));
    auto root = p.program();
    number_nodes(*root);
    return root;
}

}  // namespace mr
