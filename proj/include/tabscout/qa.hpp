#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabscout/chat_model.hpp"
#include "tabscout/corpus.hpp"
#include "tabscout/parser.hpp"
#include "tabscout/retrieval.hpp"
#include "tabscout/sql_engine.hpp"

namespace tabscout {

/// Tables sharing one screened column signature.
struct Cluster {
    std::vector<TableId> tables;                          ///< sorted, non-empty
    std::optional<std::vector<std::string>> shared_cols;  ///< sorted normalized names
};

/// Partitions retrieved tables by the set of matched header names. Clusters
/// follow the first appearance of their signature in `scored`; tables
/// without hits become singletons with no shared columns.
std::vector<Cluster> cluster_by_signature(std::span<const ScoredTable> scored);

enum class Judgement { yes, no };

std::string build_judge_prompt(std::string_view question, std::string_view table_name,
                               const std::vector<std::string>& columns);
std::string build_sql_prompt(std::string_view question, std::string_view table_name,
                             const std::vector<std::string>& columns);

/// First alphabetic token, case-folded; only "yes" is a yes.
Judgement parse_judgement(std::string_view response);

/// Strips code fences and a trailing ';' and checks: one SELECT/WITH
/// statement, exactly `table_name` in FROM/JOIN, and every identifier is a
/// provided column, the table, an alias, a keyword or a known function.
/// Throws InvalidSql. Returns the cleaned statement.
std::string validate_sql(std::string_view sql, std::string_view table_name, const std::vector<std::string>& columns);

struct QaOptions {
    /// One SQL prompt that may answer NONE instead of judge + generate.
    bool combined_judge_and_generate = false;
};

struct QaStats {
    std::size_t clusters = 0;
    std::size_t judge_calls = 0;
    std::size_t sql_calls = 0;
    std::size_t cluster_sql_calls = 0;   ///< SQL generations on the cluster path
    std::size_t cluster_refusals = 0;
    std::size_t fallback_attempts = 0;   ///< per-table text-to-SQL attempts
    std::size_t invalid_sql = 0;
    std::size_t llm_failures = 0;
    std::size_t executions = 0;
};

/// LLM-facing half of question answering: answerability judgement, SQL
/// generation and validation, with call accounting.
class SqlGenerator {
  public:
    explicit SqlGenerator(ChatModel& model, QaOptions options = {}) : model_(model), options_(options) {}

    /// LLM failures count as "no".
    Judgement judge_answerable(std::string_view question, std::string_view table_name,
                               const std::vector<std::string>& columns);

    /// Validated SQL, or nullopt on refusal / invalid output / LLM failure.
    std::optional<std::string> generate_sql(std::string_view question, std::string_view table_name,
                                            const std::vector<std::string>& columns);

    /// judge then generate (or the combined single call).
    std::optional<std::string> text_to_sql(std::string_view question, std::string_view table_name,
                                           const std::vector<std::string>& columns);

    QaStats& stats() { return stats_; }
    const QaStats& stats() const { return stats_; }
    std::vector<std::string>& log() { return log_; }

  private:
    ChatModel& model_;
    QaOptions options_;
    QaStats stats_;
    std::vector<std::string> log_;
};

struct AnswerEntry {
    TableId table;
    std::string sql;
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

struct AnswerFailure {
    TableId table;
    std::string sql;
    std::string error;
};

struct AnswerSet {
    std::vector<AnswerEntry> entries;
    std::vector<AnswerFailure> failures;
};

/// Engine execution for one table; EngineError propagates.
QueryResult execute_sql(const std::string& sql, const TableMeta& table, SqlEngine& engine);

/// Column names offered to the LLM for a table (trimmed, de-duplicated).
std::vector<std::string> prompt_columns(const TableMeta& table);

/// Cluster path: one text-to-SQL on the representative with the shared
/// columns, reused on every member by renaming the table; any successful
/// execution is kept. On refusal (or without shared columns) each table is
/// prompted with its full column list and only non-empty results are kept.
AnswerSet answer_question(const ParsedQuestion& question, std::span<const Cluster> clusters, const Corpus& corpus,
                          SqlEngine& engine, SqlGenerator& generator);

/// Deterministic stand-in for the QA LLM. Judge: yes iff a column shares a
/// word with the question. SQL: selects the columns sharing words with the
/// question (all columns if none) and requires every quoted span of the
/// question to ILIKE-match at least one offered column.
class OfflineSqlModel final : public ChatModel {
  public:
    std::string id() const override { return "offline-sql-v1"; }
    std::string complete(const std::string& prompt) override;
};

} // namespace tabscout
