#include "tabscout/sql_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <span>

#include "tabscout/text.hpp"

namespace tabscout::sql {

bool Token::is_word(std::string_view upper_keyword) const {
    return kind == TokenKind::word && iequals(raw, upper_keyword);
}

namespace {

bool ident_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

bool ident_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '$' || c >= 0x80;
}

} // namespace

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto push = [&](TokenKind kind, std::size_t begin, std::size_t end, std::string value) {
        tokens.push_back({kind, sql.substr(begin, end - begin), std::move(value), begin, end});
    };
    while (i < sql.size()) {
        const std::size_t start = i;
        const auto c = static_cast<unsigned char>(sql[i]);
        if (std::isspace(c) != 0) {
            while (i < sql.size() && std::isspace(static_cast<unsigned char>(sql[i])) != 0) {
                ++i;
            }
            push(TokenKind::whitespace, start, i, std::string(sql.substr(start, i - start)));
        } else if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
            while (i < sql.size() && sql[i] != '\n') {
                ++i;
            }
            push(TokenKind::comment, start, i, std::string(sql.substr(start, i - start)));
        } else if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
            auto close = sql.find("*/", i + 2);
            i = close == std::string_view::npos ? sql.size() : close + 2;
            push(TokenKind::comment, start, i, std::string(sql.substr(start, i - start)));
        } else if (c == '\'' || c == '"' || c == '`') {
            const char quote = static_cast<char>(c);
            std::string value;
            ++i;
            while (i < sql.size()) {
                if (sql[i] == quote) {
                    if (i + 1 < sql.size() && sql[i + 1] == quote) {
                        value.push_back(quote);
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value.push_back(sql[i]);
                ++i;
            }
            auto kind = quote == '\'' ? TokenKind::string
                        : quote == '"' ? TokenKind::quoted_ident
                                       : TokenKind::backtick_ident;
            push(kind, start, i, std::move(value));
        } else if (std::isdigit(c) != 0 ||
                   (c == '.' && i + 1 < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i + 1])) != 0)) {
            while (i < sql.size() && (std::isdigit(static_cast<unsigned char>(sql[i])) != 0 || sql[i] == '.')) {
                ++i;
            }
            if (i < sql.size() && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < sql.size() && (sql[j] == '+' || sql[j] == '-')) {
                    ++j;
                }
                if (j < sql.size() && std::isdigit(static_cast<unsigned char>(sql[j])) != 0) {
                    i = j;
                    while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i])) != 0) {
                        ++i;
                    }
                }
            }
            if (i < sql.size() && ident_start(static_cast<unsigned char>(sql[i]))) {
                // 2nd, 3d_model: identifier-like, not a number.
                while (i < sql.size() && ident_char(static_cast<unsigned char>(sql[i]))) {
                    ++i;
                }
                push(TokenKind::word, start, i, std::string(sql.substr(start, i - start)));
            } else {
                push(TokenKind::number, start, i, std::string(sql.substr(start, i - start)));
            }
        } else if (ident_start(c)) {
            while (i < sql.size() && ident_char(static_cast<unsigned char>(sql[i]))) {
                ++i;
            }
            push(TokenKind::word, start, i, std::string(sql.substr(start, i - start)));
        } else {
            static constexpr std::array<std::string_view, 7> kTwoChar = {"<=", ">=", "!=", "<>", "==", "||", "::"};
            auto two = sql.substr(i, 2);
            if (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
                i += 2;
                push(TokenKind::op, start, i, std::string(two));
            } else {
                ++i;
                bool punct = c == '(' || c == ')' || c == ',' || c == ';' || c == '.' || c == '*';
                push(punct ? TokenKind::punct : TokenKind::op, start, i, std::string(1, static_cast<char>(c)));
            }
        }
    }
    return tokens;
}

std::vector<Token> significant(const std::vector<Token>& tokens) {
    std::vector<Token> out;
    std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out), [](const Token& t) {
        return t.kind != TokenKind::whitespace && t.kind != TokenKind::comment;
    });
    return out;
}

namespace {

constexpr std::string_view kKeywords[] = {
    "ALL",      "AND",     "AS",       "ASC",     "BETWEEN",  "BY",       "CASE",    "CAST",     "COLLATE",
    "CROSS",    "DESC",    "DISTINCT", "ELSE",    "END",      "ESCAPE",   "EXCEPT",  "EXISTS",   "FALSE",
    "FETCH",    "FIRST",   "FROM",     "FULL",    "GLOB",     "GROUP",    "HAVING",  "ILIKE",    "IN",
    "INNER",    "INTERSECT", "IS",     "ISNULL",  "JOIN",     "LAST",     "LEFT",    "LIKE",     "LIMIT",
    "NATURAL",  "NEXT",    "NOT",      "NOTNULL", "NULL",     "NULLS",    "OFFSET",  "ON",       "ONLY",
    "OR",       "ORDER",   "OUTER",    "OVER",    "PARTITION", "REGEXP",  "RIGHT",   "ROW",      "ROWS",
    "SELECT",   "SIMILAR", "THEN",     "TRUE",    "UNION",    "USING",    "VALUES",  "WHEN",     "WHERE",
    "WITH",     "INTEGER", "INT",      "REAL",    "TEXT",     "VARCHAR",  "FLOAT",   "DOUBLE",   "NUMERIC",
    "DATE",     "BIGINT",  "DECIMAL",  "BOOLEAN", "TIMESTAMP", "INTERVAL",
};

constexpr std::string_view kFunctions[] = {
    "ABS",      "AVG",       "COALESCE", "CONCAT",  "COUNT",    "DATE",    "DATETIME", "EXTRACT", "GROUP_CONCAT",
    "IFNULL",   "INSTR",     "JULIANDAY", "LENGTH", "LOWER",    "LTRIM",   "MAX",      "MEDIAN",  "MIN",
    "NULLIF",   "PRINTF",    "REPLACE",  "ROUND",   "RTRIM",    "STRFTIME", "SUBSTR",  "SUBSTRING", "SUM",
    "TOTAL",    "TRIM",      "UPPER",    "YEAR",    "MONTH",    "DAY",     "STDDEV",   "VARIANCE", "ROW_NUMBER",
    "RANK",     "DENSE_RANK", "CEIL",    "FLOOR",   "STRING_AGG", "LIST",  "TYPEOF",
};

bool contains_ci(std::span<const std::string_view> words, std::string_view word) {
    return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return iequals(w, word); });
}

} // namespace

bool is_keyword(std::string_view word) {
    return contains_ci(kKeywords, word);
}

bool is_function_name(std::string_view word) {
    return contains_ci(kFunctions, word);
}

std::string quote_identifier(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string quote_string(std::string_view value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') {
            out.push_back('\'');
        }
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

} // namespace tabscout::sql
