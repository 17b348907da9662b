#include <doctest.h>

#include <fstream>
#include <random>

#include "support.hpp"
#include "tabscout/corpus.hpp"
#include "tabscout/error.hpp"

using namespace tabscout;
using testing::TempDir;
using testing::write_csv;
using testing::write_file;

TEST_CASE("load_corpus counts headers per table") {
    TempDir dir;
    write_csv(dir.path(), "a", {"x", "y"});
    write_csv(dir.path(), "b", {"Y ", "z"});
    auto corpus = load_corpus(dir.path());
    CHECK(corpus.size() == 2);
    CHECK(corpus.header_table_count("x") == 1);
    CHECK(corpus.header_table_count("y") == 2);
    CHECK(corpus.header_table_count("z") == 1);
    CHECK(corpus.at("b").headers == std::vector<std::string>{"Y ", "z"});
}

TEST_CASE("load_corpus errors") {
    TempDir dir;
    CHECK_THROWS_AS(load_corpus(dir.path()), EmptyCorpus);
    write_file(dir / "notes.txt", "x\n");
    CHECK_THROWS_AS(load_corpus(dir.path()), EmptyCorpus);
    CHECK_THROWS_AS(load_corpus(dir / "missing"), IoError);
}

TEST_CASE("load_corpus walks subdirectories and skips unparseable files") {
    TempDir dir;
    write_csv(dir.path() / "sub", "inner", {"k"});
    write_file(dir / "Upper.CSV", "q\n1\n");
    write_file(dir / "broken.csv", "\"unterminated\n");
    write_file(dir / "empty.csv", "");
    auto corpus = load_corpus(dir.path());
    CHECK(corpus.size() == 2);
    CHECK(corpus.find("sub/inner") != nullptr);
    CHECK(corpus.find("Upper") != nullptr);
    CHECK(corpus.warnings().size() == 2);
}

TEST_CASE("reloading a directory gives an identical corpus") {
    TempDir dir;
    for (std::string id : {"m", "c", "x/a"}) {
        write_csv(dir.path(), id, {"h1", id});
    }
    auto a = load_corpus(dir.path());
    auto b = load_corpus(dir.path());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.tables()[i].id == b.tables()[i].id);
        CHECK(a.tables()[i].headers == b.tables()[i].headers);
    }
    CHECK(a.header_table_counts() == b.header_table_counts());
    CHECK(a.tables().front().id == "c");
}

TEST_CASE("from_tables validates its input") {
    CHECK_THROWS_AS(Corpus::from_tables({}), EmptyCorpus);
    CHECK_THROWS_AS(Corpus::from_tables({{"a", {}, {"x"}, {}}, {"a", {}, {"y"}, {}}}), std::invalid_argument);
    CHECK_THROWS_AS(Corpus::from_tables({{"a", {}, {}, {}}}), std::invalid_argument);
}

TEST_CASE("duplicate headers inside one table count the table once") {
    auto corpus = Corpus::from_tables({{"a", {}, {"x", "X", "y"}, {}}, {"b", {}, {"x"}, {}}});
    CHECK(corpus.header_table_count("x") == 2);
    CHECK(corpus.normalized_headers(0) == std::vector<std::string>{"x", "y"});
}

TEST_CASE("scan_for_value") {
    TempDir dir;
    write_csv(dir.path(), "sales", {"product", "2024"}, {{"shoes", "3"}});
    write_csv(dir.path(), "hr", {"name", "year"}, {{"Ann", "2023"}});
    auto corpus = load_corpus(dir.path());

    SUBCASE("direct containment") {
        CHECK(scan_for_value(corpus, "shoes").tables == std::vector<TableId>{"sales"});
    }
    SUBCASE("case-insensitive by default") {
        CHECK(scan_for_value(corpus, "SHOES").tables == std::vector<TableId>{"sales"});
        ScanOptions strict;
        strict.case_sensitive = true;
        CHECK(scan_for_value(corpus, "SHOES", strict).tables.empty());
    }
    SUBCASE("header line excluded") {
        CHECK(scan_for_value(corpus, "2024").tables.empty());
    }
    SUBCASE("cell mode needs a whole-cell match") {
        ScanOptions cell;
        cell.mode = ValueMatchMode::cell;
        CHECK(scan_for_value(corpus, "sho", cell).tables.empty());
        CHECK(scan_for_value(corpus, "Shoes", cell).tables == std::vector<TableId>{"sales"});
        CHECK(scan_for_value(corpus, "sho").tables == std::vector<TableId>{"sales"});
    }
    SUBCASE("empty value rejected") {
        CHECK_THROWS_AS(scan_for_value(corpus, "  "), std::invalid_argument);
    }
}

TEST_CASE("scan_for_value reports unreadable files and continues") {
    TempDir dir;
    write_csv(dir.path(), "a", {"x"}, {{"needle"}});
    write_csv(dir.path(), "b", {"x"}, {{"needle"}});
    auto corpus = load_corpus(dir.path());
    std::filesystem::remove(dir / "b.csv");
    auto result = scan_for_value(corpus, "needle");
    CHECK(result.tables == std::vector<TableId>{"a"});
    CHECK(result.unreadable.size() == 1);
}

TEST_CASE("property: scan_for_value equals a line-by-line reference scanner") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> words = {"alpha", "Beta", "gamma", "delta 9", "x-ray", "Alphabet"};
    TempDir dir;
    std::vector<std::pair<TableId, std::vector<std::string>>> bodies;
    for (int t = 0; t < 12; ++t) {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> lines;
        for (int r = 0; r < 4; ++r) {
            std::string cell = words[rng() % words.size()];
            rows.push_back({cell});
            lines.push_back(cell);
        }
        std::string header = words[rng() % words.size()];
        std::string id = "t" + std::to_string(t);
        write_csv(dir.path(), id, {header}, rows);
        bodies.emplace_back(id, lines);
    }
    auto corpus = load_corpus(dir.path());
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    for (std::string needle : {"alpha", "BETA", "a 9", "ray", "zzz", "ph"}) {
        std::vector<TableId> want;
        for (const auto& [id, lines] : bodies) {
            bool hit = false;
            for (const auto& line : lines) {
                hit = hit || lower(line).find(lower(needle)) != std::string::npos;
            }
            if (hit) want.push_back(id);
        }
        std::sort(want.begin(), want.end());
        CHECK(scan_for_value(corpus, needle).tables == want);
    }
}

TEST_CASE("count_rows counts body records") {
    TempDir dir;
    write_csv(dir.path(), "a", {"x"}, {{"1"}, {"multi\nline"}, {"3"}});
    auto corpus = load_corpus(dir.path());
    CHECK(count_rows(corpus.at("a")) == 3);
}
