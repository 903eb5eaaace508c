#include "lexer.hpp"

#include <cctype>
#include <charconv>

#include "pir/frontend.hpp"

namespace mr {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '.'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_'; }

Tok keyword(const std::string& s) {
    if (s == "TRUE") return Tok::True;
    if (s == "FALSE") return Tok::False;
    if (s == "function") return Tok::Function;
    if (s == "if") return Tok::If;
    if (s == "else") return Tok::Else;
    if (s == "while") return Tok::While;
    return Tok::Ident;
}

}  // namespace

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto push = [&](Tok k, std::string text, int l, int c) {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.line = l;
        t.col = c;
        out.push_back(std::move(t));
    };
    while (i < src.size()) {
        char c = src[i];
        int l = line, cl = col;
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (c == '\n') {
            push(Tok::Newline, "\\n", l, cl);
            advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            std::string text = src.substr(i, j - i);
            double v = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || p != text.data() + text.size())
                throw SyntaxError("malformed number '" + text + "'", l, cl);
            push(Tok::Num, text, l, cl);
            out.back().num = v;
            advance(j - i);
            continue;
        }
        if (ident_start(c)) {
            size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            std::string text = src.substr(i, j - i);
            push(keyword(text), text, l, cl);
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::string text;
            advance(1);
            while (true) {
                if (i >= src.size() || src[i] == '\n') throw SyntaxError("unterminated string", l, cl);
                char d = src[i];
                if (d == '"') {
                    advance(1);
                    break;
                }
                if (d == '\\' && i + 1 < src.size()) {
                    char e = src[i + 1];
                    text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                    advance(2);
                    continue;
                }
                text += d;
                advance(1);
            }
            push(Tok::Str, text, l, cl);
            continue;
        }
        auto two = src.substr(i, 2);
        if (two == "<-") {
            push(Tok::Arrow, two, l, cl);
            advance(2);
            continue;
        }
        if (two == "==") {
            push(Tok::EqEq, two, l, cl);
            advance(2);
            continue;
        }
        Tok k;
        switch (c) {
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case '{': k = Tok::LBrace; break;
            case '}': k = Tok::RBrace; break;
            case ',': k = Tok::Comma; break;
            case ';': k = Tok::Semi; break;
            case '<': k = Tok::Lt; break;
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case ':': k = Tok::Colon; break;
            default: throw SyntaxError(std::string("unexpected character '") + c + "'", l, cl);
        }
        push(k, std::string(1, c), l, cl);
        advance(1);
    }
    push(Tok::End, "<eof>", line, col);
    return out;
}

}  // namespace mr
