#pragma once

#include <string>
#include <vector>

namespace mr {

enum class Tok {
    Num, Str, Ident, True, False, Function, If, Else, While,
    LParen, RParen, LBrace, RBrace, Comma, Semi, Newline,
    Arrow, EqEq, Lt, Plus, Minus, Star, Colon, End
};

struct Token {
    Tok kind;
    std::string text;
    double num = 0;
    int line = 1;
    int col = 1;
};

std::vector<Token> lex(const std::string& src);

}  // namespace mr
