#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tabscout/corpus.hpp"
#include "tabscout/encoder.hpp"
#include "tabscout/header_index.hpp"
#include "tabscout/parser.hpp"

namespace tabscout {

struct RetrievalConfig {
    std::size_t k = 5;   ///< semantic candidates per mention
    double eta = 0.7;    ///< cosine floor for semantic hits
    double tau = 0.6;    ///< min-max scaled selection threshold
    ScanOptions scan;
};

enum class MatchProvenance { lexical, semantic };

struct Match {
    double score;
    MatchProvenance provenance;
};

/// Header names matched by one column mention, keyed by normalized name.
struct MatchSet {
    std::size_t mention_index = 0;
    std::map<std::string, Match> hits;
};

/// Best-matching column of one table for one mention.
struct ColumnHit {
    std::size_t mention_index;
    TableId table_id;
    std::string header;   ///< normalized name
    std::string verbatim; ///< header as written in the table
    double score;
};

struct ScoredTable {
    TableId table_id;
    double s_col = 0.0;
    double s_val = 0.0;
    double s_total = 0.0;
    std::vector<ColumnHit> hits; ///< ordered by mention index
    std::vector<std::string> matched_values;
};

/// BM25 over the distinct normalized header names. Token idf is
/// ln(n_names / df), so a shared token contributes iff it is not in every
/// header name.
class LexicalHeaderMatcher {
  public:
    explicit LexicalHeaderMatcher(const Corpus& corpus, double k1 = 1.2, double b = 0.75);

    double bm25(std::string_view mention, std::string_view header_name) const;

    /// Every header with BM25 > 0 enters with score 1.0.
    MatchSet match(std::string_view mention, std::size_t mention_index = 0) const;

  private:
    double idf(const std::string& token) const;

    double k1_;
    double b_;
    std::size_t n_names_ = 0;
    double avg_len_ = 0.0;
    std::map<std::string, std::vector<std::string>> postings_; ///< token -> names
};

MatchSet lexical_match(std::string_view mention, const Corpus& corpus);

/// top_k_names filtered to cosine >= eta.
MatchSet semantic_match(const Eigen::Ref<const Eigen::VectorXd>& mention_vec, const HeaderIndex& index,
                        std::size_t k, double eta, std::size_t mention_index = 0);

/// Union of two match sets; a name in both keeps the larger score (lexical
/// on ties, since lexical hits are 1.0).
MatchSet merge_matches(const MatchSet& lexical, const MatchSet& semantic);

/// One hit per table sharing a header with the match set: the max score,
/// ties by header name ascending. Sorted by table id.
std::vector<ColumnHit> best_hits(const MatchSet& match_set, const Corpus& corpus);

/// ln(N / number of tables holding the header). Throws UnknownHeader.
double idf_col(std::string_view header, const Corpus& corpus);

/// ln(N / |T_v|). Throws std::invalid_argument when no table matched.
double idf_val(std::size_t n_tables, std::size_t matching_tables);

/// Sum of score * idf_col(header) over the hits of one table.
double column_score(std::span<const ColumnHit> hits, const Corpus& corpus);

/// s_val per table from each value's matching table set. Values are
/// accumulated in key order; empty sets are skipped.
std::map<TableId, double> value_score(const std::map<std::string, std::vector<TableId>>& value_tables,
                                      std::size_t n_tables);

/// Everything retrieval learned about one question before ranking.
struct Evidence {
    std::size_t n_mentions = 0;
    std::vector<MatchSet> matches;                          ///< per mention
    std::vector<std::vector<ColumnHit>> hits_by_mention;    ///< per mention, by table id
    std::map<std::string, std::vector<TableId>> value_tables; ///< value -> T_v
    std::vector<std::string> warnings;
};

/// Candidate set = tables with any column hit or any value hit; scores are
/// s_col + |E| * s_val; sorted descending, ties by table id.
std::vector<ScoredTable> rank_tables(const Evidence& evidence, const Corpus& corpus);

class Retriever {
  public:
    /// Throws DimensionMismatch if encoder and index disagree on dimension.
    Retriever(const Corpus& corpus, const HeaderIndex& index, const Encoder& encoder, RetrievalConfig config);

    Evidence gather(const ParsedQuestion& question) const;
    std::vector<ScoredTable> retrieve(const ParsedQuestion& question) const;

    const RetrievalConfig& config() const { return config_; }
    const Corpus& corpus() const { return corpus_; }

  private:
    const Corpus& corpus_;
    const HeaderIndex& index_;
    const Encoder& encoder_;
    RetrievalConfig config_;
    LexicalHeaderMatcher lexical_;
};

/// Indices of the scores whose per-query min-max scaled value is >= tau
/// (within 1e-12). A constant score list keeps everything.
std::vector<std::size_t> threshold_indices(std::span<const double> scores, double tau);

/// Keeps the ranked tables passing threshold_indices, preserving order.
std::vector<ScoredTable> select_by_threshold(std::span<const ScoredTable> ranked, double tau);

} // namespace tabscout
