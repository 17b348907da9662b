#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabscout/corpus.hpp"

struct sqlite3;

namespace tabscout {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Cell>;

struct QueryResult {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

/// Executes single-table SQL over a table file. Throws EngineError; an empty
/// result is a valid outcome.
class SqlEngine {
  public:
    virtual ~SqlEngine() = default;
    virtual QueryResult execute(const std::string& sql, const TableMeta& table) = 0;
};

/// In-process SQLite engine. Each CSV is materialized once into an in-memory
/// table named by its id, with INTEGER / REAL / TEXT affinity inferred per
/// column and empty cells stored as NULL. ILIKE is rewritten to LIKE, which
/// SQLite evaluates ASCII case-insensitively. Not thread-safe.
class SqliteEngine final : public SqlEngine {
  public:
    SqliteEngine();
    ~SqliteEngine() override;
    SqliteEngine(const SqliteEngine&) = delete;
    SqliteEngine& operator=(const SqliteEngine&) = delete;

    QueryResult execute(const std::string& sql, const TableMeta& table) override;

    /// Column names as created in SQLite (duplicates suffixed _2, _3, ...).
    std::vector<std::string> loaded_columns(const TableMeta& table);

  private:
    void ensure_loaded(const TableMeta& table);

    sqlite3* db_ = nullptr;
    std::set<TableId> loaded_;
};

/// ILIKE -> LIKE outside string literals and quoted identifiers.
std::string rewrite_ilike(std::string_view sql);

/// Tables named after FROM / JOIN (including comma lists), as written.
std::vector<std::string> referenced_tables(std::string_view sql);

/// Replaces the table identifier `from` (in FROM / JOIN positions and as a
/// column qualifier) with the quoted identifier `to`; every other byte of the
/// statement is preserved.
std::string replace_table_name(std::string_view sql, std::string_view from, std::string_view to);

/// Cell rendering used for output and comparison: trimmed strings, integers
/// in decimal, reals with 6 significant digits, NULL as "<NULL>".
std::string canonical_cell(const Cell& cell);

} // namespace tabscout
