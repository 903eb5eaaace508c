#include <gtest/gtest.h>

#include "pir/driver.hpp"
#include "pir/frontend.hpp"
#include "support.hpp"

using namespace mr;

namespace {

ExprPtr parse_numbered(const std::string& src) {
    ExprPtr e = parse(src);
    number_nodes(*e);
    return e;
}

}  // namespace

TEST(Frontend, ParsesAssignmentAndCall) {
    ExprPtr e = parse("x <- 1\nf(x, 2)");
    ASSERT_EQ(e->kind, ExprKind::Block);
    ASSERT_EQ(e->kids.size(), 2u);
    EXPECT_EQ(e->kids[0]->kind, ExprKind::Assign);
    EXPECT_EQ(e->kids[0]->text, "x");
    EXPECT_EQ(e->kids[0]->kids[0]->num, 1.0);
    const Expr& call = *e->kids[1];
    ASSERT_EQ(call.kind, ExprKind::Call);
    ASSERT_EQ(call.kids.size(), 3u);
    EXPECT_EQ(call.kids[0]->text, "f");
}

TEST(Frontend, BinopPrecedence) {
    ExprPtr e = parse("1 + 2 * 3 < 4");
    const Expr& lt = *e->kids[0];
    ASSERT_EQ(lt.kind, ExprKind::Binop);
    EXPECT_EQ(lt.op, BinopKind::Lt);
    const Expr& add = *lt.kids[0];
    EXPECT_EQ(add.op, BinopKind::Add);
    EXPECT_EQ(add.kids[1]->op, BinopKind::Mul);
}

TEST(Frontend, ColonBindsTighterThanArithmetic) {
    ExprPtr e = parse("1:3 + 1");
    const Expr& add = *e->kids[0];
    EXPECT_EQ(add.op, BinopKind::Add);
    EXPECT_EQ(add.kids[0]->op, BinopKind::Colon);
}

TEST(Frontend, FunctionAndControlFlow) {
    ExprPtr e = parse("f <- function(a, b) { if (a) b else while (b) b <- 0 }");
    const Expr& fn = *e->kids[0]->kids[0];
    ASSERT_EQ(fn.kind, ExprKind::FunDef);
    EXPECT_EQ(fn.params, (std::vector<std::string>{"a", "b"}));
    const Expr& body = *fn.kids[0];
    ASSERT_EQ(body.kind, ExprKind::Block);
    const Expr& iff = *body.kids[0];
    ASSERT_EQ(iff.kind, ExprKind::If);
    ASSERT_EQ(iff.kids.size(), 3u);
    EXPECT_EQ(iff.kids[2]->kind, ExprKind::While);
}

TEST(Frontend, NodeIdsArePreorder) {
    ExprPtr e = parse_numbered("x <- 1 + y");
    EXPECT_EQ(e->node_id, 0);
    EXPECT_EQ(e->kids[0]->node_id, 1);
    EXPECT_EQ(e->kids[0]->kids[0]->node_id, 2);
    EXPECT_EQ(e->kids[0]->kids[0]->kids[0]->node_id, 3);
    EXPECT_EQ(e->kids[0]->kids[0]->kids[1]->node_id, 4);
}

TEST(Frontend, SyntaxErrorsCarryPosition) {
    try {
        parse("x <- (1 + \n  )");
        FAIL() << "expected a syntax error";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line, 2);
        EXPECT_GT(e.col, 0);
    }
    EXPECT_THROW(parse("\"open"), SyntaxError);
    EXPECT_THROW(parse("x <- @"), SyntaxError);
    EXPECT_THROW(parse("function <- 1"), SyntaxError);
}

TEST(Frontend, CloneIsStructurallyEqual) {
    ExprPtr e = parse_numbered("f <- function(x) x + 1\nf(2)");
    ExprPtr c = e->clone();
    EXPECT_TRUE(equal(*e, *c));
    c->kids[1]->kids[1]->num = 3;
    EXPECT_FALSE(equal(*e, *c));
}

TEST(Frontend, FormatDouble) {
    EXPECT_EQ(format_double(42), "42");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(-3.5), "-3.5");
    EXPECT_EQ(std::stod(format_double(1e20)), 1e20);
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Frontend, Builtins) {
    ASSERT_NE(find_builtin("assign"), nullptr);
    EXPECT_EQ(find_builtin("assign")->arity, 3);
    EXPECT_EQ(find_builtin("c")->arity, -1);
    EXPECT_EQ(find_builtin("nope"), nullptr);
    EXPECT_TRUE(is_reserved("function"));
    EXPECT_TRUE(is_reserved("while"));
    EXPECT_FALSE(is_reserved("c"));
}

// Printing and reparsing gives back the same tree on every corpus program
// and on generated ones.
TEST(Frontend, PrintRoundTrip) {
    std::vector<std::string> sources;
    for (const char* n : {"answer", "diamond", "mandelbrot_like", "twister_c", "promise_effects", "vectors",
                          "reflect_heavy", "get_secret"})
        sources.push_back(testing_support::read_corpus(std::string(n) + ".mr"));
    for (uint64_t s = 0; s < 50; ++s) sources.push_back(pir::generate_program(s, 8, 0.2));
    for (auto& src : sources) {
        ExprPtr a = parse_numbered(src);
        std::string text = print(*a);
        ExprPtr b = parse_numbered(text);
        EXPECT_TRUE(equal(*a, *b)) << text;
        EXPECT_EQ(print(*b), text);
    }
}
