#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "mixplan/util/error.hpp"

namespace mixplan::lang {

enum class Tok {
    Ident,   // lowercase-initial word or bare integer (constants, predicates)
    Var,     // uppercase-initial word
    Int,     // integer literal (also usable as a constant name)
    String,  // "quoted"
    Hash,    // #sort, #instance, ... (text includes the '#')
    Dot,
    Comma,
    LParen,
    RParen,
    Colon,
    Pipe,
    Arrow,    // :-
    CrArrow,  // +-
    Neq,      // !=
    Minus,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line = 1;
    int col = 1;
};

// Splits the stream into tokens. '%' starts a comment running to end of line.
inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '%') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        int tl = line, tc = col;
        auto push = [&](Tok k, std::string text, std::size_t n) {
            out.push_back({k, std::move(text), tl, tc});
            advance(n);
        };
        if (c == '#') {
            std::size_t j = i + 1;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            push(Tok::Hash, src.substr(i, j - i), j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(Tok::Int, src.substr(i, j - i), j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            std::string word = src.substr(i, j - i);
            push(std::isupper(static_cast<unsigned char>(c)) ? Tok::Var : Tok::Ident, word, j - i);
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"') ++j;
            if (j >= src.size()) throw ParseError("unterminated string", tl, tc);
            push(Tok::String, src.substr(i + 1, j - i - 1), j - i + 1);
            continue;
        }
        if (src.compare(i, 2, ":-") == 0) {
            push(Tok::Arrow, ":-", 2);
            continue;
        }
        if (src.compare(i, 2, "+-") == 0) {
            push(Tok::CrArrow, "+-", 2);
            continue;
        }
        if (src.compare(i, 2, "!=") == 0) {
            push(Tok::Neq, "!=", 2);
            continue;
        }
        switch (c) {
            case '.': push(Tok::Dot, ".", 1); break;
            case ',': push(Tok::Comma, ",", 1); break;
            case '(': push(Tok::LParen, "(", 1); break;
            case ')': push(Tok::RParen, ")", 1); break;
            case ':': push(Tok::Colon, ":", 1); break;
            case '|': push(Tok::Pipe, "|", 1); break;
            case '-': push(Tok::Minus, "-", 1); break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
        }
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

}  // namespace mixplan::lang
