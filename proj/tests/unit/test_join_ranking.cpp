#include <doctest.h>

#include "suites.hpp"
#include "support.hpp"
#include "tabscout/encoder.hpp"
#include "tabscout/error.hpp"
#include "tabscout/header_index.hpp"
#include "tabscout/join_ranking.hpp"

using namespace tabscout;

namespace {
JoinGraph graph(std::vector<TableId> nodes, std::vector<std::pair<TableId, TableId>> edges) {
    JoinGraph g(std::move(nodes));
    for (auto& [a, b] : edges) g.add_edge({a, b, std::nullopt});
    return g;
}
ScoredGroup group(std::vector<TableId> tables, double score) {
    ScoredGroup g;
    g.tables = std::move(tables);
    g.score = score;
    return g;
}
} // namespace

TEST_CASE("enumerate_candidate_groups examples") {
    auto path = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    CHECK(enumerate_candidate_groups(path, {"a"}, 2) == std::vector<TableGroup>{{"a"}, {"a", "b"}});

    auto isolated = graph({"a", "b"}, {});
    CHECK(enumerate_candidate_groups(isolated, {"a"}, 4) == std::vector<TableGroup>{{"a"}});

    auto triangle = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    CHECK(enumerate_candidate_groups(triangle, {"a", "b", "c"}, 3).size() == 7);

    CHECK_THROWS_AS(enumerate_candidate_groups(triangle, {"a"}, 3, 2), GroupExplosion);
    CHECK_THROWS(enumerate_candidate_groups(triangle, {"a"}, 0));
}

TEST_CASE("score_group examples") {
    GroupEvidence ev;
    ev.n_mentions = 2;
    ev.mention_support = {{{"T1", 0.9 * 2.0}}, {{"T2", 1.0 * 1.0}}};
    auto g = score_group({"T1", "T2"}, ev);
    CHECK(g.score == doctest::Approx(2.8));
    CHECK(g.per_mention_support.at(0) == "T1");
    CHECK(g.per_mention_support.at(1) == "T2");

    GroupEvidence vals;
    vals.n_mentions = 3;
    vals.mention_support.resize(3);
    vals.value_scores["T1"] = 1.5;
    CHECK(score_group({"T1"}, vals).score == doctest::Approx(4.5));

    GroupEvidence none;
    none.n_mentions = 2;
    none.mention_support.resize(2);
    CHECK(score_group({"T1"}, none).score == 0.0);
    CHECK_THROWS(score_group({}, none));
}

TEST_CASE("per-mention support ties go to the smaller table id") {
    GroupEvidence ev;
    ev.n_mentions = 1;
    ev.mention_support = {{{"b", 1.0}, {"a", 1.0}}};
    CHECK(score_group({"b", "a"}, ev).per_mention_support.at(0) == "a");
}

TEST_CASE("rank_groups examples") {
    auto r = rank_groups({group({"g2"}, 3), group({"g1"}, 5)});
    CHECK(r[0].tables == TableGroup{"g1"});

    auto sizes = rank_groups({group({"a", "b", "c"}, 4), group({"x", "y"}, 4)});
    CHECK(sizes[0].tables.size() == 2);

    auto sub = rank_groups({group({"a", "b"}, 2), group({"a"}, 2)});
    CHECK(sub[0].tables == TableGroup{"a"});

    auto dup = rank_groups({group({"b", "a"}, 2), group({"a", "b"}, 2)});
    CHECK(dup.size() == 1);
}

TEST_CASE("rank_join_groups over a real corpus") {
    testing::TempDir dir;
    testing::write_csv(dir.path(), "players", {"player_name", "team_name"}, {{"Kofi", "Rovers"}});
    testing::write_csv(dir.path(), "teams", {"team_name", "stadium"}, {{"Rovers", "Millbrook"}});
    testing::write_csv(dir.path(), "cities", {"city", "mayor"}, {{"Oslo", "X"}});
    auto corpus = load_corpus(dir.path());
    HashingEncoder enc;
    auto index = HeaderIndex::build(corpus, enc);
    RetrievalConfig cfg;
    cfg.k = 100000;
    cfg.eta = 0.0;
    Retriever retriever(corpus, index, enc, cfg);
    auto g = graph({"cities", "players", "teams"}, {{"players", "teams"}});
    auto evidence = retriever.gather(ParsedQuestion{"q", {"stadium", "player name"}, {"Kofi"}, ""});
    auto ranked = rank_join_groups(evidence, corpus, g);
    REQUIRE_FALSE(ranked.empty());
    CHECK(ranked[0].tables == TableGroup{"players", "teams"});
    for (const auto& grp : ranked) {
        CHECK(g.is_connected({grp.tables.begin(), grp.tables.end()}));
    }
}

TEST_CASE("oracle: join ranking matches a brute-force ranker") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        INFO("seed " << seed);
        CHECK(testing::check_join_oracle(seed) == "");
    }
}
