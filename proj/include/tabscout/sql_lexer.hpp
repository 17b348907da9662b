#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tabscout::sql {

enum class TokenKind {
    word,          ///< bare identifier or keyword
    quoted_ident,  ///< "..."
    backtick_ident,///< `...`
    string,        ///< '...'
    number,
    op,            ///< comparison / arithmetic operators
    punct,         ///< ( ) , ; . *
    comment,
    whitespace,
};

struct Token {
    TokenKind kind;
    std::string_view raw; ///< exact source bytes
    std::string value;    ///< unescaped content for quoted kinds, raw otherwise
    std::size_t begin;
    std::size_t end;

    bool is_word(std::string_view upper_keyword) const;
    bool is_identifier() const {
        return kind == TokenKind::word || kind == TokenKind::quoted_ident || kind == TokenKind::backtick_ident;
    }
};

/// Lossless tokenization: concatenating every token's raw text reproduces the
/// input. Unterminated quotes extend to the end of input.
std::vector<Token> tokenize(std::string_view sql);

/// Tokens without whitespace and comments.
std::vector<Token> significant(const std::vector<Token>& tokens);

bool is_keyword(std::string_view word);
bool is_function_name(std::string_view word);

/// Double-quote an identifier, doubling embedded quotes.
std::string quote_identifier(std::string_view name);

/// Single-quote a string literal, doubling embedded quotes.
std::string quote_string(std::string_view value);

} // namespace tabscout::sql
