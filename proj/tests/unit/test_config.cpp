#include <doctest.h>

#include "support.hpp"
#include "tabscout/config.hpp"
#include "tabscout/error.hpp"

using namespace tabscout;

TEST_CASE("defaults") {
    EngineConfig c;
    CHECK(c.retrieval.k == 5);
    CHECK(c.retrieval.eta == 0.7);
    CHECK(c.retrieval.tau == 0.6);
    CHECK(c.join.max_group_size == 4);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("parse_config reads keys, comments and blanks") {
    auto c = parse_config("# tuning\nk = 7\n\neta=0.5  # inline\ntau = 0.25\nmax_group_size = 3\nllm_backend = offline\n");
    CHECK(c.retrieval.k == 7);
    CHECK(c.retrieval.eta == 0.5);
    CHECK(c.retrieval.tau == 0.25);
    CHECK(c.join.max_group_size == 3);
    CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("k"), ConfigError);
    CHECK_THROWS_AS(parse_config("k = many"), ConfigError);
    CHECK_THROWS_AS(parse_config("log_base = 10"), ConfigError);
    CHECK_NOTHROW(parse_config("log_base = e"));
}

TEST_CASE("validate ranges and remote requirements") {
    EngineConfig c;
    c.retrieval.tau = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    EngineConfig r;
    r.set("llm_backend", "remote");
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.set("llm_base_url", "http://localhost:1/v1");
    r.set("llm_model", "m");
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("load_config resolves paths against the file's directory") {
    testing::TempDir dir;
    testing::write_file(dir / "sub/cfg.txt", "corpus_root = lake\nindex_path = /abs/h.idx\n");
    auto c = load_config(dir / "sub/cfg.txt");
    CHECK(c.corpus_root == dir / "sub/lake");
    CHECK(c.index_path == std::filesystem::path("/abs/h.idx"));
    CHECK_THROWS_AS(load_config(dir / "missing.txt"), Error);
}

TEST_CASE("environment overrides") {
    EngineConfig c;
    apply_env_overrides(c, [](const char* name) -> std::optional<std::string> {
        if (std::string(name) == "TABSCOUT_LLM_MODEL") return "m1";
        if (std::string(name) == "TABSCOUT_LLM_API_KEY") return "secret";
        return std::nullopt;
    });
    CHECK(c.llm_model == "m1");
    CHECK(c.llm_api_key == "secret");
    CHECK(c.llm_base_url.empty());
}

TEST_CASE("factories") {
    EngineConfig c;
    c.encoder_dimension = 64;
    auto enc = make_encoder(c);
    CHECK(enc->dimension() == 64);
    CHECK(make_chat_model(c) == nullptr);
    c.llm_base_url = "http://localhost:1/v1";
    c.llm_model = "m";
    CHECK(make_chat_model(c) != nullptr);
}
