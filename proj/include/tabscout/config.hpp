#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "tabscout/chat_model.hpp"
#include "tabscout/encoder.hpp"
#include "tabscout/join_ranking.hpp"
#include "tabscout/retrieval.hpp"

namespace tabscout {

enum class Backend { offline, remote };

struct EngineConfig {
    std::filesystem::path corpus_root;
    std::filesystem::path index_path;
    std::filesystem::path join_graph_path;

    RetrievalConfig retrieval;
    JoinRankingConfig join;

    std::size_t parser_batch = 32;
    Backend parser_backend = Backend::offline;
    Backend encoder_backend = Backend::offline;
    Backend llm_backend = Backend::offline;

    std::string llm_base_url;
    std::string llm_model;
    std::string llm_api_key;
    std::string encoder_url;
    Eigen::Index encoder_dimension = 256;
    std::string encoder_api_key;
    bool combined_judge_and_generate = false;

    /// Sets one key from its textual value. Throws ConfigError on unknown keys
    /// and unparsable or out-of-range values.
    void set(std::string_view key, std::string_view value);
    void validate() const;
};

/// `key = value` lines; blank lines and `#` comments ignored.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config(const std::filesystem::path& path, EngineConfig base = {});

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Secrets and endpoints may come from TABSCOUT_LLM_API_KEY, TABSCOUT_LLM_BASE_URL,
/// TABSCOUT_LLM_MODEL, TABSCOUT_ENCODER_URL and TABSCOUT_ENCODER_API_KEY.
void apply_env_overrides(EngineConfig& config, const EnvLookup& lookup);
std::optional<std::string> process_env(const char* name);

std::unique_ptr<Encoder> make_encoder(const EngineConfig& config);
/// Null for the offline backend.
std::unique_ptr<ChatModel> make_chat_model(const EngineConfig& config);

} // namespace tabscout
