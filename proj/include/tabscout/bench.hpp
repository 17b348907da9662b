#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tabscout/corpus.hpp"
#include "tabscout/join_graph.hpp"
#include "tabscout/sql_engine.hpp"

namespace tabscout {

/// Canonical rendering of one result row (cells via canonical_cell).
using CanonicalRow = std::vector<std::string>;

struct BenchRecord {
    std::string qid;
    std::string question;
    std::set<TableId> truth_tables;
    std::map<TableId, std::vector<CanonicalRow>> truth_cells;
    std::optional<std::set<TableId>> truth_group;
};

std::string to_jsonl_line(const BenchRecord& record);
BenchRecord bench_record_from_json(const std::string& line);
std::vector<BenchRecord> read_bench_records(const std::filesystem::path& path);
void write_bench_records(const std::filesystem::path& path, const std::vector<BenchRecord>& records);

struct QuestionMetrics {
    std::string qid;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    std::vector<QuestionMetrics> per_question;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::map<std::size_t, double> hit_at_k; ///< group Hit@K
    std::size_t n_questions = 0;
};

/// P = |R n G| / |R| (0 for empty R), Rec = |R n G| / |G| (0 for empty G),
/// F1 = 2PR / (P + R) (0 when both are 0).
QuestionMetrics prf(const std::string& qid, const std::multiset<std::string>& retrieved,
                    const std::multiset<std::string>& truth);

/// Table-level macro P/R/F1. Throws MissingQuestion when the question ids on
/// the two sides differ.
EvalReport macro_prf(const std::map<std::string, std::set<TableId>>& retrieved,
                     const std::map<std::string, std::set<TableId>>& truth);

/// Fraction of questions whose truth set is contained in one of the first K
/// ranked groups. Questions missing from `ranked` count as misses.
double hit_at_k_group(const std::map<std::string, std::vector<std::vector<TableId>>>& ranked,
                      const std::map<std::string, std::set<TableId>>& truth, std::size_t k);

/// Cell-level answers for one question: (table, canonical row) pairs.
using CellAnswers = std::vector<std::pair<TableId, CanonicalRow>>;

/// Macro P/R/F1 over multisets of (table, row). Every question in `truth` is
/// scored; answers for unknown questions are ignored.
EvalReport cell_prf(const std::map<std::string, CellAnswers>& answers, const std::map<std::string, CellAnswers>& truth);

CellAnswers truth_cells_of(const BenchRecord& record);

struct AnswerFile {
    std::map<std::string, CellAnswers> cells;
    std::map<std::string, std::set<TableId>> tables; ///< tables that produced an executed answer
};

/// Reads answer JSONL ({"question_id", "table", "rows"} per line). A line with
/// a null table registers the question with no answers; lines carrying an
/// "error" count for neither tables nor cells.
AnswerFile read_answers(const std::filesystem::path& path);
CanonicalRow canonical_row(const Row& row);

/// Clause metadata of an independent-benchmark source record.
struct SqlClauses {
    std::string select;
    std::string where;
    std::string group_by;
    std::string having;
    std::string order_by;
    std::string limit;
};

struct IndependentSource {
    std::string qid;
    std::string question;
    SqlClauses clauses;
};

std::vector<IndependentSource> read_independent_sources(const std::filesystem::path& path);

/// "= 'literal'" comparisons become "ILIKE 'literal'".
std::string rewrite_equality_to_ilike(std::string_view predicate);

/// SELECT .. FROM "table" [WHERE ..] [GROUP BY ..] [HAVING ..] [ORDER BY ..] [LIMIT ..]
std::string assemble_sql(const SqlClauses& clauses, std::string_view table_id);

struct DroppedQuestion {
    std::string qid;
    std::string reason;
};

struct IndependentBenchmark {
    std::vector<BenchRecord> records;
    std::vector<DroppedQuestion> dropped;
};

/// Runs each assembled query (equalities rewritten to ILIKE) on every corpus
/// table. A record is kept iff at least one table returns rows; those tables
/// are the truth and their outputs the cell-level truth.
IndependentBenchmark build_independent_benchmark(const std::vector<IndependentSource>& sources, const Corpus& corpus,
                                                 SqlEngine& engine);

struct ForeignKey {
    std::string table;
    std::string column;
    std::string ref_table;
    std::string ref_column;
};

struct DatabaseSchema {
    std::string db_id;
    std::vector<std::string> tables;
    std::vector<ForeignKey> foreign_keys;
};

struct JoinSource {
    std::string qid;
    std::string db_id;
    std::string question;
    std::string sql;
};

struct JoinBenchmark {
    std::vector<BenchRecord> records;
    JoinGraph graph; ///< over "<db_id>/<table>" ids
    std::vector<DroppedQuestion> dropped;
};

std::vector<DatabaseSchema> read_database_schemas(const std::filesystem::path& path);
std::vector<JoinSource> read_join_sources(const std::filesystem::path& path);

/// PK-FK join graph per database, then: drop SQL without JOIN, keep the first
/// of identical SQL strings, drop queries touching a table of degree < 2.
JoinBenchmark build_join_benchmark(const std::vector<DatabaseSchema>& databases,
                                   const std::vector<JoinSource>& questions);

} // namespace tabscout
