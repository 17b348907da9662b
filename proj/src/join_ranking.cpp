#include "tabscout/join_ranking.hpp"

#include <algorithm>
#include <deque>

#include "tabscout/error.hpp"

namespace tabscout {

std::vector<TableGroup> enumerate_candidate_groups(const JoinGraph& graph, const std::set<TableId>& hit_tables,
                                                   std::size_t max_size, std::size_t cap) {
    if (max_size == 0) {
        throw std::invalid_argument("max_size must be >= 1");
    }
    std::set<TableGroup> seen;
    std::deque<TableGroup> queue;
    auto admit = [&](TableGroup group) {
        if (seen.insert(group).second) {
            if (seen.size() > cap) {
                throw GroupExplosion("candidate group enumeration exceeded the cap of " + std::to_string(cap));
            }
            queue.push_back(std::move(group));
        }
    };
    for (const auto& seed : hit_tables) {
        if (graph.has_node(seed)) {
            admit({seed});
        }
    }
    while (!queue.empty()) {
        TableGroup group = std::move(queue.front());
        queue.pop_front();
        if (group.size() >= max_size) {
            continue;
        }
        std::set<TableId> frontier;
        for (const auto& member : group) {
            for (const auto& next : graph.neighbors(member)) {
                if (!std::binary_search(group.begin(), group.end(), next)) {
                    frontier.insert(next);
                }
            }
        }
        for (const auto& next : frontier) {
            TableGroup grown = group;
            grown.insert(std::upper_bound(grown.begin(), grown.end(), next), next);
            admit(std::move(grown));
        }
    }
    std::vector<TableGroup> out(seen.begin(), seen.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const TableGroup& a, const TableGroup& b) { return a.size() < b.size(); });
    return out;
}

std::set<TableId> GroupEvidence::hit_tables() const {
    std::set<TableId> out;
    for (const auto& support : mention_support) {
        for (const auto& [table, score] : support) {
            out.insert(table);
        }
    }
    for (const auto& [table, score] : value_scores) {
        out.insert(table);
    }
    return out;
}

GroupEvidence make_group_evidence(const Evidence& evidence, const Corpus& corpus) {
    GroupEvidence out;
    out.n_mentions = evidence.n_mentions;
    out.mention_support.resize(evidence.n_mentions);
    for (std::size_t i = 0; i < evidence.hits_by_mention.size() && i < evidence.n_mentions; ++i) {
        for (const auto& hit : evidence.hits_by_mention[i]) {
            out.mention_support[i][hit.table_id] = hit.score * idf_col(hit.header, corpus);
        }
    }
    out.value_scores = value_score(evidence.value_tables, corpus.size());
    // Tables that matched only ubiquitous values still count as evidence.
    for (const auto& [value, tables] : evidence.value_tables) {
        for (const auto& table : tables) {
            out.value_scores.try_emplace(table, 0.0);
        }
    }
    return out;
}

ScoredGroup score_group(const TableGroup& group, const GroupEvidence& evidence) {
    if (group.empty()) {
        throw std::invalid_argument("score_group: empty group");
    }
    ScoredGroup out;
    out.tables = group;
    std::sort(out.tables.begin(), out.tables.end());
    double column_part = 0.0;
    for (std::size_t i = 0; i < evidence.mention_support.size(); ++i) {
        const auto& support = evidence.mention_support[i];
        const TableId* best_table = nullptr;
        double best = 0.0;
        for (const auto& table : out.tables) {
            auto it = support.find(table);
            if (it == support.end()) {
                continue;
            }
            if (best_table == nullptr || it->second > best) {
                best_table = &table;
                best = it->second;
            }
        }
        if (best_table != nullptr) {
            column_part += best;
            out.per_mention_support.emplace(i, *best_table);
        }
    }
    double best_value = 0.0;
    for (const auto& table : out.tables) {
        auto it = evidence.value_scores.find(table);
        if (it != evidence.value_scores.end()) {
            best_value = std::max(best_value, it->second);
        }
    }
    out.score = column_part + static_cast<double>(evidence.n_mentions) * best_value;
    return out;
}

std::vector<ScoredGroup> rank_groups(std::vector<ScoredGroup> groups) {
    for (auto& group : groups) {
        std::sort(group.tables.begin(), group.tables.end());
    }
    std::sort(groups.begin(), groups.end(), [](const ScoredGroup& a, const ScoredGroup& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        if (a.tables.size() != b.tables.size()) {
            return a.tables.size() < b.tables.size();
        }
        return a.tables < b.tables;
    });
    std::set<TableGroup> seen;
    std::vector<ScoredGroup> out;
    out.reserve(groups.size());
    for (auto& group : groups) {
        if (seen.insert(group.tables).second) {
            out.push_back(std::move(group));
        }
    }
    return out;
}

std::vector<ScoredGroup> rank_join_groups(const Evidence& evidence, const Corpus& corpus, const JoinGraph& graph,
                                          const JoinRankingConfig& config) {
    auto group_evidence = make_group_evidence(evidence, corpus);
    auto groups = enumerate_candidate_groups(graph, group_evidence.hit_tables(), config.max_group_size,
                                             config.enumeration_cap);
    std::vector<ScoredGroup> scored;
    scored.reserve(groups.size());
    for (const auto& group : groups) {
        scored.push_back(score_group(group, group_evidence));
    }
    return rank_groups(std::move(scored));
}

} // namespace tabscout
