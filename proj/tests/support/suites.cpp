#include "suites.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "support.hpp"
#include "tabscout/bench.hpp"
#include "tabscout/corpus.hpp"
#include "tabscout/encoder.hpp"
#include "tabscout/header_index.hpp"
#include "tabscout/join_ranking.hpp"
#include "tabscout/parser.hpp"
#include "tabscout/qa.hpp"
#include "tabscout/retrieval.hpp"
#include "tabscout/sql_engine.hpp"
#include "tabscout/sql_lexer.hpp"

namespace testing {

using namespace tabscout;

namespace {

const std::vector<std::string> kHeaderWords = {"name", "city",  "year",  "price", "sale",  "number", "total",
                                               "id",   "country", "date", "amount", "product", "store", "rate"};
const std::vector<std::string> kCellWords = {"paris", "shoes", "2024", "north", "red",    "alpha",
                                             "42",    "oslo",  "blue", "delta", "2019.5", "Lima"};

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string random_header(std::mt19937_64& rng) {
    std::string h = pick(rng, kHeaderWords);
    if (uniform(rng, 0, 2) == 0) {
        h += (uniform(rng, 0, 1) ? " " : "_") + pick(rng, kHeaderWords);
    }
    if (uniform(rng, 0, 4) == 0) {
        h[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(h[0])));
    }
    if (uniform(rng, 0, 6) == 0) {
        h = " " + h;
    }
    return h;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

} // namespace

std::string check_retrieval_oracle(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TempDir dir;
    std::vector<std::pair<std::string, std::string>> files;
    // Some corpora share one token across every header name.
    const bool ubiquitous = uniform(rng, 0, 3) == 0;
    std::size_t n_tables = uniform(rng, 1, 20);
    for (std::size_t t = 0; t < n_tables; ++t) {
        std::vector<std::string> headers;
        std::size_t n_headers = uniform(rng, 1, 8);
        for (std::size_t h = 0; h < n_headers; ++h) {
            headers.push_back(random_header(rng) + (ubiquitous ? " field" : ""));
        }
        std::vector<std::vector<std::string>> rows(uniform(rng, 0, 4));
        for (auto& row : rows) {
            for (std::size_t h = 0; h < n_headers; ++h) {
                row.push_back(uniform(rng, 0, 3) == 0 ? "" : pick(rng, kCellWords));
            }
        }
        std::string id = "t" + std::to_string(t);
        auto text = csv_text(headers, rows);
        write_file(dir / (id + ".csv"), text);
        files.emplace_back(id, text);
    }

    ParsedQuestion q;
    q.question = "random";
    for (std::size_t i = uniform(rng, 0, 5); i > 0; --i) {
        q.column_mentions.push_back(uniform(rng, 0, 1) ? random_header(rng) : pick(rng, kHeaderWords) + "s");
        if (uniform(rng, 0, 2) == 0) {
            q.column_mentions.back() += " field";
        }
    }
    std::set<std::string> values;
    for (std::size_t i = uniform(rng, 0, 3); i > 0; --i) {
        values.insert(uniform(rng, 0, 4) == 0 ? "missing" : pick(rng, kCellWords));
    }
    q.value_mentions.assign(values.begin(), values.end());

    RetrievalConfig cfg;
    cfg.k = uniform(rng, 1, 6);
    cfg.eta = std::vector<double>{0.0, 0.3, 0.5, 0.7}[uniform(rng, 0, 3)];

    auto corpus = load_corpus(dir.path());
    HashingEncoder encoder(64);
    auto index = HeaderIndex::build(corpus, encoder);
    auto got = Retriever(corpus, index, encoder, cfg).retrieve(q);

    oracle::Inputs in;
    in.tables = oracle::read_tables(files);
    in.index_names = index.names();
    in.index_vectors = index.vectors();
    in.mention_vectors = q.column_mentions.empty() ? Eigen::MatrixXd(0, 64) : encoder.encode(q.column_mentions);
    in.mentions = q.column_mentions;
    in.values = q.value_mentions;
    in.k = cfg.k;
    in.eta = cfg.eta;
    auto want = oracle::retrieve(in);

    std::ostringstream why;
    if (got.size() != want.size()) {
        why << "seed " << seed << ": " << got.size() << " ranked tables, oracle has " << want.size();
        return why.str();
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].table_id != want[i].id || !close(got[i].s_total, want[i].score)) {
            why << "seed " << seed << ": rank " << i << " is " << got[i].table_id << " (" << got[i].s_total
                << "), oracle " << want[i].id << " (" << want[i].score << ")";
            return why.str();
        }
        if (!close(got[i].s_total, got[i].s_col + static_cast<double>(q.column_mentions.size()) * got[i].s_val)) {
            return "seed " + std::to_string(seed) + ": s_total inconsistent with its parts";
        }
        std::set<std::size_t> mentions;
        for (const auto& hit : got[i].hits) {
            if (!mentions.insert(hit.mention_index).second) {
                return "seed " + std::to_string(seed) + ": mention contributes twice to one table";
            }
        }
    }
    return {};
}

std::string check_join_oracle(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t n = uniform(rng, 1, 8);
    std::vector<TableId> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back("n" + std::to_string(i));
    }
    JoinGraph graph(nodes);
    oracle::Graph og{nodes, {}};
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (uniform(rng, 0, 2) == 0) {
                graph.add_edge({nodes[a], nodes[b], std::nullopt});
                og.edges.insert({nodes[a], nodes[b]});
                og.edges.insert({nodes[b], nodes[a]});
            }
        }
    }
    GroupEvidence ev;
    ev.n_mentions = uniform(rng, 0, 4);
    ev.mention_support.resize(ev.n_mentions);
    const std::vector<double> grid = {0.0, 0.5, 0.7, 1.0, 1.5, 2.302585092994046};
    for (auto& support : ev.mention_support) {
        for (const auto& node : nodes) {
            if (uniform(rng, 0, 2) == 0) {
                support[node] = pick(rng, grid);
            }
        }
    }
    for (const auto& node : nodes) {
        if (uniform(rng, 0, 3) == 0) {
            ev.value_scores[node] = pick(rng, grid);
        }
    }
    std::size_t max_size = uniform(rng, 1, 5);

    auto groups = enumerate_candidate_groups(graph, ev.hit_tables(), max_size);
    std::vector<ScoredGroup> scored;
    for (const auto& g : groups) {
        scored.push_back(score_group(g, ev));
    }
    auto got = rank_groups(scored);
    auto want = oracle::rank_groups(og, ev.mention_support, ev.value_scores, max_size);

    std::ostringstream why;
    if (got.size() != want.size()) {
        why << "seed " << seed << ": " << got.size() << " groups, oracle has " << want.size();
        return why.str();
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].tables != want[i].tables || !close(got[i].score, want[i].score)) {
            why << "seed " << seed << ": rank " << i << " differs from the oracle";
            return why.str();
        }
        if (!oracle::connected(og, got[i].tables)) {
            why << "seed " << seed << ": group at rank " << i << " is not connected";
            return why.str();
        }
    }
    for (const auto& a : got) {
        for (const auto& b : got) {
            bool subset = a.tables.size() < b.tables.size() &&
                          std::includes(b.tables.begin(), b.tables.end(), a.tables.begin(), a.tables.end());
            if (subset && b.score < a.score) {
                why << "seed " << seed << ": superset scores below its subset";
                return why.str();
            }
        }
    }
    return {};
}

std::string check_threshold(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> score(0.0, 50.0);
    std::vector<double> s(uniform(rng, 1, 30));
    for (auto& x : s) {
        x = uniform(rng, 0, 4) == 0 ? 7.0 : score(rng);
    }
    double tau = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double a = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    double b = std::uniform_real_distribution<double>(-100.0, 100.0)(rng);
    std::vector<double> t;
    for (double x : s) {
        t.push_back(a * x + b);
    }
    auto base = threshold_indices(s, tau);
    if (base != oracle::threshold(s, tau)) {
        return "seed " + std::to_string(seed) + ": selection differs from the oracle";
    }
    if (threshold_indices(t, tau) != base) {
        return "seed " + std::to_string(seed) + ": selection changed under a positive affine transform";
    }
    return {};
}

std::string check_idf(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<TableMeta> tables;
    std::size_t n = uniform(rng, 1, 20);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<std::string> headers{"shared"};
        for (std::size_t h = uniform(rng, 0, 6); h > 0; --h) {
            headers.push_back(random_header(rng));
        }
        tables.push_back({"t" + std::to_string(t), {}, headers, std::nullopt});
    }
    auto corpus = Corpus::from_tables(tables);
    for (const auto& t : tables) {
        for (const auto& h : t.headers) {
            std::size_t count = 0;
            for (const auto& other : tables) {
                count += std::any_of(other.headers.begin(), other.headers.end(),
                                     [&](const std::string& x) { return oracle::norm(x) == oracle::norm(h); });
            }
            double want = std::log(static_cast<double>(n) / static_cast<double>(count));
            if (std::abs(idf_col(h, corpus) - want) > 1e-9) {
                return "seed " + std::to_string(seed) + ": idf_col('" + h + "') differs from ln(N/count)";
            }
        }
    }
    if (idf_col("shared", corpus) != 0.0) {
        return "seed " + std::to_string(seed) + ": ubiquitous header has nonzero idf";
    }
    for (std::size_t m = 1; m <= n; ++m) {
        if (std::abs(idf_val(n, m) - std::log(double(n) / double(m))) > 1e-9) {
            return "seed " + std::to_string(seed) + ": idf_val differs from ln(N/|T_v|)";
        }
    }
    if (idf_val(n, n) != 0.0) {
        return "seed " + std::to_string(seed) + ": value in every table has nonzero idf";
    }
    return {};
}

std::string check_metrics(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t n_q = uniform(rng, 1, 10);
    std::size_t n_t = uniform(rng, 1, 10);
    auto random_set = [&](std::size_t min) {
        std::set<TableId> s;
        for (std::size_t i = 0; i < n_t; ++i) {
            if (uniform(rng, 0, 2) == 0) {
                s.insert("t" + std::to_string(i));
            }
        }
        if (s.size() < min) {
            s.insert("t" + std::to_string(uniform(rng, 0, n_t - 1)));
        }
        return s;
    };
    std::map<std::string, std::set<TableId>> retrieved, truth;
    std::map<std::string, std::vector<std::vector<TableId>>> ranked;
    std::map<std::string, std::vector<std::set<std::string>>> ranked_sets;
    std::map<std::string, CellAnswers> answers, truth_cells;
    double mp = 0, mr = 0, mf = 0, cp = 0, cr = 0, cf = 0;
    for (std::size_t q = 0; q < n_q; ++q) {
        std::string qid = "q" + std::to_string(q);
        retrieved[qid] = random_set(0);
        truth[qid] = random_set(1);
        auto ref = oracle::prf({retrieved[qid].begin(), retrieved[qid].end()}, {truth[qid].begin(), truth[qid].end()});
        mp += ref[0];
        mr += ref[1];
        mf += ref[2];
        for (std::size_t g = uniform(rng, 0, 6); g > 0; --g) {
            auto s = random_set(1);
            ranked[qid].emplace_back(s.begin(), s.end());
            ranked_sets[qid].push_back(s);
        }
        std::vector<std::string> got_keys, gold_keys;
        answers[qid];
        truth_cells[qid];
        for (std::size_t r = uniform(rng, 0, 5); r > 0; --r) {
            std::pair<TableId, CanonicalRow> cell{"t" + std::to_string(uniform(rng, 0, 2)), {pick(rng, kCellWords)}};
            answers[qid].push_back(cell);
            got_keys.push_back(cell.first + "|" + cell.second[0]);
        }
        for (std::size_t r = uniform(rng, 0, 5); r > 0; --r) {
            std::pair<TableId, CanonicalRow> cell{"t" + std::to_string(uniform(rng, 0, 2)), {pick(rng, kCellWords)}};
            truth_cells[qid].push_back(cell);
            gold_keys.push_back(cell.first + "|" + cell.second[0]);
        }
        auto cref = oracle::prf(got_keys, gold_keys);
        cp += cref[0];
        cr += cref[1];
        cf += cref[2];
    }
    double nq = static_cast<double>(n_q);
    auto rep = macro_prf(retrieved, truth);
    if (!close(rep.macro_precision, mp / nq) || !close(rep.macro_recall, mr / nq) || !close(rep.macro_f1, mf / nq)) {
        return "seed " + std::to_string(seed) + ": macro_prf differs from the reference";
    }
    auto cells = cell_prf(answers, truth_cells);
    if (!close(cells.macro_precision, cp / nq) || !close(cells.macro_recall, cr / nq) || !close(cells.macro_f1, cf / nq)) {
        return "seed " + std::to_string(seed) + ": cell_prf differs from the reference";
    }
    double prev = -1;
    for (std::size_t k = 1; k <= 8; ++k) {
        double h = hit_at_k_group(ranked, truth, k);
        if (!close(h, oracle::hit_at_k(ranked_sets, truth, k))) {
            return "seed " + std::to_string(seed) + ": hit_at_k_group differs from the reference at K=" +
                   std::to_string(k);
        }
        if (h < prev) {
            return "seed " + std::to_string(seed) + ": hit_at_k_group decreases in K";
        }
        prev = h;
    }
    for (const auto& m : rep.per_question) {
        for (double v : {m.precision, m.recall, m.f1}) {
            if (v < 0 || v > 1) {
                return "seed " + std::to_string(seed) + ": metric outside [0, 1]";
            }
        }
    }
    return {};
}

std::string check_cluster_economy(std::size_t& calls) {
    TempDir dir;
    // Three schemas; every table has a "city" column holding "Paris".
    const std::vector<std::vector<std::string>> schemas = {
        {"city", "population", "mayor"}, {"city", "sales", "store"}, {"city", "rainfall", "month"}};
    const std::vector<std::size_t> sizes = {4, 3, 3};
    std::vector<ScoredTable> scored;
    std::size_t id = 0;
    for (std::size_t s = 0; s < schemas.size(); ++s) {
        for (std::size_t i = 0; i < sizes[s]; ++i, ++id) {
            std::string name = "tab" + std::to_string(id);
            write_csv(dir.path(), name, schemas[s], {{"Paris", std::to_string(id), "x"}, {"Rome", "1", "y"}});
            ScoredTable t;
            t.table_id = name;
            t.s_total = 1.0;
            t.hits.push_back({0, name, schemas[s][0], schemas[s][0], 1.0});
            t.hits.push_back({1, name, schemas[s][1], schemas[s][1], 1.0});
            scored.push_back(t);
        }
    }
    auto corpus = load_corpus(dir.path());
    std::size_t sql_prompts = 0;
    FunctionChatModel model("mock", [&](const std::string& prompt) -> std::string {
        if (prompt.find("Answer only 'yes' or 'no'.") != std::string::npos) {
            return "yes";
        }
        ++sql_prompts;
        auto name_at = prompt.find("Table Name:\n    ") + 16;
        auto table = prompt.substr(name_at, prompt.find('\n', name_at) - name_at);
        return "SELECT \"city\" FROM " + sql::quote_identifier(table) + " WHERE \"city\" ILIKE 'paris'";
    });
    SqlGenerator generator(model);
    SqliteEngine engine;
    ParsedQuestion q{"Which city is 'Paris'?", {"city", "other"}, {"Paris"}, ""};
    auto clusters = cluster_by_signature(scored);
    auto answers = answer_question(q, clusters, corpus, engine, generator);
    calls = generator.stats().cluster_sql_calls;
    if (clusters.size() != 3) {
        return std::to_string(clusters.size()) + " clusters instead of 3";
    }
    if (calls != 3 || sql_prompts != 3) {
        return std::to_string(calls) + " cluster-path SQL calls instead of 3";
    }
    if (answers.entries.size() != 10) {
        return std::to_string(answers.entries.size()) + " answer entries instead of 10";
    }
    return {};
}

FixtureRun run_fixture_pipeline() {
    FixtureRun run;
    auto start = std::chrono::steady_clock::now();
    try {
        auto corpus = load_corpus(fixture_dir() / "lake");
        HashingEncoder encoder;
        auto index = HeaderIndex::build(corpus, encoder);
        std::vector<std::string> headers;
        for (const auto& [name, count] : corpus.header_table_counts()) {
            headers.push_back(name);
        }
        OfflineQuestionParser parser(headers);
        auto records = read_bench_records(fixture_dir() / "truth.jsonl");
        std::vector<std::string> texts;
        std::map<std::string, std::set<TableId>> truth, predicted;
        for (const auto& r : records) {
            texts.push_back(r.question);
            truth[r.qid] = r.truth_tables;
        }
        RetrievalConfig cfg; // k=5, eta=0.7, tau=0.6
        Retriever retriever(corpus, index, encoder, cfg);
        auto parses = parse_questions(parser, texts);
        for (std::size_t i = 0; i < records.size(); ++i) {
            auto& set = predicted[records[i].qid];
            if (!parses[i].parsed) {
                continue;
            }
            for (const auto& t : select_by_threshold(retriever.retrieve(*parses[i].parsed), cfg.tau)) {
                set.insert(t.table_id);
            }
        }
        run.macro_f1 = macro_prf(predicted, truth).macro_f1;
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

} // namespace testing
