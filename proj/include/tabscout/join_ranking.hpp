#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "tabscout/join_graph.hpp"
#include "tabscout/retrieval.hpp"

namespace tabscout {

/// Sorted table ids forming a connected subgraph.
using TableGroup = std::vector<TableId>;

struct JoinRankingConfig {
    std::size_t max_group_size = 4;
    std::size_t enumeration_cap = 1'000'000;
};

/// All connected subgraphs with at most `max_size` nodes containing at least
/// one hit table, ordered by (size, ids). Throws GroupExplosion past `cap`.
std::vector<TableGroup> enumerate_candidate_groups(const JoinGraph& graph, const std::set<TableId>& hit_tables,
                                                   std::size_t max_size, std::size_t cap = 1'000'000);

/// Per-mention table contributions s_i(T) * idf_col(h_i(T)) and per-table
/// s_val, i.e. the inputs of the group score.
struct GroupEvidence {
    std::size_t n_mentions = 0;
    std::vector<std::map<TableId, double>> mention_support;
    std::map<TableId, double> value_scores;

    std::set<TableId> hit_tables() const;
};

GroupEvidence make_group_evidence(const Evidence& evidence, const Corpus& corpus);

struct ScoredGroup {
    TableGroup tables;
    double score = 0.0;
    std::map<std::size_t, TableId> per_mention_support;
};

/// Sum over mentions of the best contribution inside the group, plus
/// |E| * max s_val over the group. Argmax ties go to the smaller table id.
ScoredGroup score_group(const TableGroup& group, const GroupEvidence& evidence);

/// Descending score; ties by size then ids. Repeated table sets are dropped.
std::vector<ScoredGroup> rank_groups(std::vector<ScoredGroup> groups);

/// enumerate + score + rank.
std::vector<ScoredGroup> rank_join_groups(const Evidence& evidence, const Corpus& corpus, const JoinGraph& graph,
                                          const JoinRankingConfig& config = {});

} // namespace tabscout
