#include "tabscout/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "tabscout/error.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

LexicalHeaderMatcher::LexicalHeaderMatcher(const Corpus& corpus, double k1, double b) : k1_(k1), b_(b) {
    std::size_t total_len = 0;
    for (const auto& [name, count] : corpus.header_table_counts()) {
        auto tokens = word_tokens(name);
        total_len += tokens.size();
        ++n_names_;
        std::set<std::string> distinct(tokens.begin(), tokens.end());
        for (const auto& token : distinct) {
            postings_[token].push_back(name);
        }
    }
    avg_len_ = n_names_ > 0 ? static_cast<double>(total_len) / static_cast<double>(n_names_) : 0.0;
}

double LexicalHeaderMatcher::idf(const std::string& token) const {
    auto it = postings_.find(token);
    if (it == postings_.end() || n_names_ == 0) {
        return 0.0;
    }
    return std::log(static_cast<double>(n_names_) / static_cast<double>(it->second.size()));
}

double LexicalHeaderMatcher::bm25(std::string_view mention, std::string_view header_name) const {
    auto query = word_tokens(mention);
    auto doc = word_tokens(header_name);
    std::set<std::string> distinct(query.begin(), query.end());
    double len_norm = avg_len_ > 0 ? static_cast<double>(doc.size()) / avg_len_ : 1.0;
    double score = 0.0;
    for (const auto& term : distinct) {
        auto tf = static_cast<double>(std::count(doc.begin(), doc.end(), term));
        if (tf == 0) {
            continue;
        }
        score += idf(term) * tf * (k1_ + 1) / (tf + k1_ * (1 - b_ + b_ * len_norm));
    }
    return score;
}

MatchSet LexicalHeaderMatcher::match(std::string_view mention, std::size_t mention_index) const {
    MatchSet out;
    out.mention_index = mention_index;
    auto tokens = word_tokens(mention);
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    for (const auto& token : distinct) {
        auto it = postings_.find(token);
        if (it == postings_.end() || it->second.size() >= n_names_) {
            continue;
        }
        for (const auto& name : it->second) {
            out.hits[name] = Match{1.0, MatchProvenance::lexical};
        }
    }
    return out;
}

MatchSet lexical_match(std::string_view mention, const Corpus& corpus) {
    return LexicalHeaderMatcher(corpus).match(mention);
}

MatchSet semantic_match(const Eigen::Ref<const Eigen::VectorXd>& mention_vec, const HeaderIndex& index,
                        std::size_t k, double eta, std::size_t mention_index) {
    MatchSet out;
    out.mention_index = mention_index;
    if (index.size() == 0) {
        return out;
    }
    for (auto& [name, score] : index.top_k_names(mention_vec, k)) {
        if (score >= eta) {
            out.hits.emplace(std::move(name), Match{score, MatchProvenance::semantic});
        }
    }
    return out;
}

MatchSet merge_matches(const MatchSet& lexical, const MatchSet& semantic) {
    MatchSet out = lexical;
    for (const auto& [name, match] : semantic.hits) {
        auto [it, inserted] = out.hits.emplace(name, match);
        if (!inserted && match.score > it->second.score) {
            it->second = match;
        }
    }
    return out;
}

std::vector<ColumnHit> best_hits(const MatchSet& match_set, const Corpus& corpus) {
    // table index -> (score, name); names iterate ascending so the first
    // strictly larger score wins and equal scores keep the smaller name.
    std::map<std::size_t, std::pair<double, const std::string*>> best;
    for (const auto& [name, match] : match_set.hits) {
        for (auto table : corpus.tables_with_header(name)) {
            auto [it, inserted] = best.emplace(table, std::make_pair(match.score, &name));
            if (!inserted && match.score > it->second.first) {
                it->second = {match.score, &name};
            }
        }
    }
    std::vector<ColumnHit> hits;
    hits.reserve(best.size());
    for (const auto& [table, choice] : best) {
        const auto& name = *choice.second;
        hits.push_back(ColumnHit{match_set.mention_index, corpus.tables()[table].id, name,
                                 corpus.verbatim_header(table, name).value_or(name), choice.first});
    }
    return hits;
}

double idf_col(std::string_view header, const Corpus& corpus) {
    auto count = corpus.header_table_count(header);
    if (count == 0) {
        throw UnknownHeader("header '" + std::string(header) + "' occurs in no table");
    }
    return std::log(static_cast<double>(corpus.size()) / static_cast<double>(count));
}

double idf_val(std::size_t n_tables, std::size_t matching_tables) {
    if (matching_tables == 0 || matching_tables > n_tables) {
        throw std::invalid_argument("idf_val: matching table count must be in [1, N]");
    }
    return std::log(static_cast<double>(n_tables) / static_cast<double>(matching_tables));
}

double column_score(std::span<const ColumnHit> hits, const Corpus& corpus) {
    double total = 0.0;
    for (const auto& hit : hits) {
        total += hit.score * idf_col(hit.header, corpus);
    }
    return total;
}

std::map<TableId, double> value_score(const std::map<std::string, std::vector<TableId>>& value_tables,
                                      std::size_t n_tables) {
    std::map<TableId, double> scores;
    for (const auto& [value, tables] : value_tables) {
        if (tables.empty()) {
            continue;
        }
        double weight = idf_val(n_tables, tables.size());
        for (const auto& table : tables) {
            scores[table] += weight;
        }
    }
    return scores;
}

std::vector<ScoredTable> rank_tables(const Evidence& evidence, const Corpus& corpus) {
    std::map<TableId, ScoredTable> candidates;
    auto entry = [&](const TableId& id) -> ScoredTable& {
        auto [it, inserted] = candidates.try_emplace(id);
        if (inserted) {
            it->second.table_id = id;
        }
        return it->second;
    };
    for (const auto& hits : evidence.hits_by_mention) {
        for (const auto& hit : hits) {
            auto& table = entry(hit.table_id);
            table.s_col += hit.score * idf_col(hit.header, corpus);
            table.hits.push_back(hit);
        }
    }
    auto s_val = value_score(evidence.value_tables, corpus.size());
    for (const auto& [value, tables] : evidence.value_tables) {
        for (const auto& id : tables) {
            entry(id).matched_values.push_back(value);
        }
    }
    std::vector<ScoredTable> ranked;
    ranked.reserve(candidates.size());
    const auto n_mentions = static_cast<double>(evidence.n_mentions);
    for (auto& [id, table] : candidates) {
        auto it = s_val.find(id);
        table.s_val = it == s_val.end() ? 0.0 : it->second;
        table.s_total = table.s_col + n_mentions * table.s_val;
        ranked.push_back(std::move(table));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const ScoredTable& a, const ScoredTable& b) {
        return a.s_total > b.s_total;
    });
    return ranked;
}

Retriever::Retriever(const Corpus& corpus, const HeaderIndex& index, const Encoder& encoder, RetrievalConfig config)
    : corpus_(corpus), index_(index), encoder_(encoder), config_(config), lexical_(corpus) {
    if (index.size() > 0 && encoder.dimension() != index.dimension()) {
        throw DimensionMismatch("encoder '" + encoder.id() + "' has dimension " +
                                std::to_string(encoder.dimension()) + ", index has " +
                                std::to_string(index.dimension()));
    }
    if (config_.k == 0) {
        throw ConfigError("k must be >= 1");
    }
    if (!(config_.eta >= 0.0) || !(config_.tau >= 0.0 && config_.tau <= 1.0)) {
        throw ConfigError("eta must be >= 0 and tau in [0, 1]");
    }
}

Evidence Retriever::gather(const ParsedQuestion& question) const {
    Evidence evidence;
    evidence.n_mentions = question.column_mentions.size();
    if (!question.column_mentions.empty()) {
        Eigen::MatrixXd embedded = encoder_.encode(question.column_mentions);
        for (std::size_t i = 0; i < question.column_mentions.size(); ++i) {
            auto lex = lexical_.match(question.column_mentions[i], i);
            auto sem = semantic_match(embedded.row(static_cast<Eigen::Index>(i)).transpose(), index_, config_.k,
                                      config_.eta, i);
            auto merged = merge_matches(lex, sem);
            merged.mention_index = i;
            evidence.hits_by_mention.push_back(best_hits(merged, corpus_));
            evidence.matches.push_back(std::move(merged));
        }
    }
    for (const auto& value : question.value_mentions) {
        if (trim(value).empty()) {
            continue;
        }
        auto scan = scan_for_value(corpus_, value, config_.scan);
        for (auto& problem : scan.unreadable) {
            evidence.warnings.push_back(std::move(problem));
        }
        evidence.value_tables[value] = std::move(scan.tables);
    }
    return evidence;
}

std::vector<ScoredTable> Retriever::retrieve(const ParsedQuestion& question) const {
    return rank_tables(gather(question), corpus_);
}

std::vector<std::size_t> threshold_indices(std::span<const double> scores, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("tau must be in [0, 1]");
    }
    std::vector<std::size_t> keep;
    if (scores.empty()) {
        return keep;
    }
    auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double scaled = hi > lo ? (scores[i] - lo) / (hi - lo) : 1.0;
        if (scaled >= tau - 1e-12) {
            keep.push_back(i);
        }
    }
    return keep;
}

std::vector<ScoredTable> select_by_threshold(std::span<const ScoredTable> ranked, double tau) {
    std::vector<double> scores;
    scores.reserve(ranked.size());
    for (const auto& table : ranked) {
        scores.push_back(table.s_total);
    }
    std::vector<ScoredTable> out;
    for (auto i : threshold_indices(scores, tau)) {
        out.push_back(ranked[i]);
    }
    return out;
}

} // namespace tabscout
