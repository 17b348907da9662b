#include "tabscout/sql_engine.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "tabscout/csv.hpp"
#include "tabscout/error.hpp"
#include "tabscout/sql_lexer.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

namespace {

class Statement {
  public:
    Statement(sqlite3* db, const std::string& sql) {
        if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
            std::string message = sqlite3_errmsg(db);
            sqlite3_finalize(stmt_);
            throw EngineError(message);
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    sqlite3_stmt* get() const { return stmt_; }

  private:
    sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string message = err != nullptr ? err : "unknown error";
        sqlite3_free(err);
        throw EngineError(message);
    }
}

enum class Affinity { integer, real, text };

bool parses_integer(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

bool parses_real(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    std::string copy(s);
    char* end = nullptr;
    errno = 0;
    std::strtod(copy.c_str(), &end);
    if (end != copy.c_str() + copy.size() || errno == ERANGE) {
        return false;
    }
    // Reject inf/nan spellings; only plain decimal notation counts.
    return std::all_of(copy.begin(), copy.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '-' || c == '+' || c == 'e' ||
               c == 'E';
    });
}

std::vector<std::string> unique_column_names(const std::vector<std::string>& headers) {
    std::vector<std::string> names;
    std::set<std::string> taken;
    for (std::size_t i = 0; i < headers.size(); ++i) {
        std::string base = std::string(trim(headers[i]));
        if (base.empty()) {
            base = "column_" + std::to_string(i + 1);
        }
        std::string name = base;
        for (int suffix = 2; taken.count(to_lower(name)) != 0; ++suffix) {
            name = base + "_" + std::to_string(suffix);
        }
        taken.insert(to_lower(name));
        names.push_back(std::move(name));
    }
    return names;
}

} // namespace

SqliteEngine::SqliteEngine() {
    if (sqlite3_open(":memory:", &db_) != SQLITE_OK) {
        std::string message = db_ != nullptr ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw EngineError("cannot open SQLite: " + message);
    }
}

SqliteEngine::~SqliteEngine() {
    sqlite3_close(db_);
}

void SqliteEngine::ensure_loaded(const TableMeta& table) {
    if (loaded_.count(table.id) != 0) {
        return;
    }
    std::string data;
    std::vector<csv::Record> records;
    try {
        data = read_file(table.path);
        records = csv::parse(data);
    } catch (const IoError& e) {
        throw EngineError(e.what());
    } catch (const csv::ParseError& e) {
        throw EngineError("'" + table.path.string() + "': " + e.what());
    }
    if (records.empty()) {
        throw EngineError("'" + table.path.string() + "' has no header record");
    }
    const auto columns = unique_column_names(table.headers);
    const std::size_t width = columns.size();

    std::vector<Affinity> affinity(width, Affinity::integer);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        for (std::size_t c = 0; c < width && c < rec.size(); ++c) {
            auto cell = trim(rec[c]);
            if (cell.empty() || affinity[c] == Affinity::text) {
                continue;
            }
            if (affinity[c] == Affinity::integer && !parses_integer(cell)) {
                affinity[c] = parses_real(cell) ? Affinity::real : Affinity::text;
            } else if (affinity[c] == Affinity::real && !parses_real(cell)) {
                affinity[c] = Affinity::text;
            }
        }
    }

    std::string create = "CREATE TABLE " + sql::quote_identifier(table.id) + " (";
    std::string insert = "INSERT INTO " + sql::quote_identifier(table.id) + " VALUES (";
    for (std::size_t c = 0; c < width; ++c) {
        create += (c ? ", " : "") + sql::quote_identifier(columns[c]) +
                  (affinity[c] == Affinity::integer ? " INTEGER" : affinity[c] == Affinity::real ? " REAL" : " TEXT");
        insert += c ? ", ?" : "?";
    }
    create += ")";
    insert += ")";

    exec(db_, "DROP TABLE IF EXISTS " + sql::quote_identifier(table.id));
    exec(db_, create);
    exec(db_, "BEGIN");
    try {
        Statement stmt(db_, insert);
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            if (rec.size() == 1 && rec[0].empty()) {
                continue; // blank line
            }
            sqlite3_reset(stmt.get());
            for (std::size_t c = 0; c < width; ++c) {
                int idx = static_cast<int>(c + 1);
                if (c >= rec.size() || trim(rec[c]).empty()) {
                    sqlite3_bind_null(stmt.get(), idx);
                    continue;
                }
                std::string value = sanitize_utf8(rec[c]);
                if (affinity[c] != Affinity::text) {
                    value = std::string(trim(value));
                }
                sqlite3_bind_text(stmt.get(), idx, value.c_str(), static_cast<int>(value.size()), SQLITE_TRANSIENT);
            }
            if (sqlite3_step(stmt.get()) != SQLITE_DONE) {
                throw EngineError(sqlite3_errmsg(db_));
            }
        }
        exec(db_, "COMMIT");
    } catch (...) {
        sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
        throw;
    }
    loaded_.insert(table.id);
}

std::vector<std::string> SqliteEngine::loaded_columns(const TableMeta& table) {
    return unique_column_names(table.headers);
}

QueryResult SqliteEngine::execute(const std::string& sql_text, const TableMeta& table) {
    auto tables = referenced_tables(sql_text);
    if (tables.empty()) {
        throw EngineError("query does not reference table '" + table.id + "'");
    }
    for (const auto& name : tables) {
        if (!iequals(name, table.id)) {
            throw EngineError("query references '" + name + "' but targets table '" + table.id + "'");
        }
    }
    ensure_loaded(table);

    Statement stmt(db_, rewrite_ilike(sql_text));
    if (sqlite3_stmt_readonly(stmt.get()) == 0) {
        throw EngineError("only read-only statements are allowed");
    }
    QueryResult result;
    const int n_cols = sqlite3_column_count(stmt.get());
    for (int c = 0; c < n_cols; ++c) {
        const char* name = sqlite3_column_name(stmt.get(), c);
        result.columns.emplace_back(name != nullptr ? name : "");
    }
    while (true) {
        int rc = sqlite3_step(stmt.get());
        if (rc == SQLITE_DONE) {
            break;
        }
        if (rc != SQLITE_ROW) {
            throw EngineError(sqlite3_errmsg(db_));
        }
        Row row;
        row.reserve(static_cast<std::size_t>(n_cols));
        for (int c = 0; c < n_cols; ++c) {
            switch (sqlite3_column_type(stmt.get(), c)) {
            case SQLITE_INTEGER:
                row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt.get(), c)));
                break;
            case SQLITE_FLOAT:
                row.emplace_back(sqlite3_column_double(stmt.get(), c));
                break;
            case SQLITE_NULL:
                row.emplace_back(std::monostate{});
                break;
            default: {
                const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), c));
                int bytes = sqlite3_column_bytes(stmt.get(), c);
                row.emplace_back(std::string(text != nullptr ? text : "", static_cast<std::size_t>(bytes)));
            }
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string rewrite_ilike(std::string_view sql_text) {
    std::string out;
    out.reserve(sql_text.size());
    for (const auto& token : sql::tokenize(sql_text)) {
        out.append(token.is_word("ILIKE") ? std::string_view("LIKE") : token.raw);
    }
    return out;
}

namespace {

/// Indices (into the significant token list) of table-name tokens.
std::vector<std::size_t> table_positions(const std::vector<sql::Token>& toks) {
    std::vector<std::size_t> out;
    auto is_name = [&](std::size_t i) {
        return i < toks.size() && toks[i].is_identifier() &&
               (toks[i].kind != sql::TokenKind::word || !sql::is_keyword(toks[i].raw));
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        bool from = toks[i].is_word("FROM");
        if (!from && !toks[i].is_word("JOIN")) {
            continue;
        }
        std::size_t j = i + 1;
        while (is_name(j)) {
            // schema.table: the last part names the table.
            while (j + 2 < toks.size() && toks[j + 1].kind == sql::TokenKind::punct && toks[j + 1].raw == "." &&
                   is_name(j + 2)) {
                j += 2;
            }
            out.push_back(j);
            ++j;
            if (j < toks.size() && toks[j].is_word("AS")) {
                ++j;
            }
            if (is_name(j)) {
                ++j; // alias
            }
            if (from && j < toks.size() && toks[j].kind == sql::TokenKind::punct && toks[j].raw == ",") {
                ++j;
                continue;
            }
            break;
        }
    }
    return out;
}

} // namespace

std::vector<std::string> referenced_tables(std::string_view sql_text) {
    auto toks = sql::significant(sql::tokenize(sql_text));
    std::vector<std::string> out;
    for (auto i : table_positions(toks)) {
        if (std::find(out.begin(), out.end(), toks[i].value) == out.end()) {
            out.push_back(toks[i].value);
        }
    }
    return out;
}

std::string replace_table_name(std::string_view sql_text, std::string_view from, std::string_view to) {
    auto all = sql::tokenize(sql_text);
    auto toks = sql::significant(all);
    std::set<std::size_t> replace_at; // byte offsets
    for (auto i : table_positions(toks)) {
        if (iequals(toks[i].value, from)) {
            replace_at.insert(toks[i].begin);
        }
    }
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].is_identifier() && toks[i + 1].kind == sql::TokenKind::punct && toks[i + 1].raw == "." &&
            iequals(toks[i].value, from)) {
            replace_at.insert(toks[i].begin);
        }
    }
    std::string out;
    out.reserve(sql_text.size() + to.size());
    for (const auto& token : all) {
        if (replace_at.count(token.begin) != 0) {
            out.append(sql::quote_identifier(to));
        } else {
            out.append(token.raw);
        }
    }
    return out;
}

std::string canonical_cell(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "<NULL>";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6g", v);
                return buf;
            } else {
                return std::string(trim(v));
            }
        },
        cell);
}

} // namespace tabscout
