#include "tabscout/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "tabscout/error.hpp"
#include "tabscout/text.hpp"

namespace tabscout {

namespace {

std::size_t parse_size(std::string_view key, std::string_view value, std::size_t min) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || out < min) {
        throw ConfigError("'" + std::string(key) + "' expects an integer >= " + std::to_string(min) + ", got '" +
                          std::string(value) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    std::string s(value);
    char* end = nullptr;
    double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    auto v = to_lower(value);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(value) + "'");
}

Backend parse_backend(std::string_view key, std::string_view value) {
    auto v = to_lower(value);
    if (v == "offline" || v == "local" || v == "mock") {
        return Backend::offline;
    }
    if (v == "remote") {
        return Backend::remote;
    }
    throw ConfigError("'" + std::string(key) + "' expects offline|remote, got '" + std::string(value) + "'");
}

} // namespace

void EngineConfig::set(std::string_view key, std::string_view value) {
    if (key == "corpus_root") {
        corpus_root = std::string(value);
    } else if (key == "index_path") {
        index_path = std::string(value);
    } else if (key == "join_graph") {
        join_graph_path = std::string(value);
    } else if (key == "k") {
        retrieval.k = parse_size(key, value, 1);
    } else if (key == "eta") {
        retrieval.eta = parse_double(key, value);
    } else if (key == "tau") {
        retrieval.tau = parse_double(key, value);
    } else if (key == "value_match_mode") {
        retrieval.scan.mode = parse_value_match_mode(value);
    } else if (key == "value_case_sensitive") {
        retrieval.scan.case_sensitive = parse_bool(key, value);
    } else if (key == "max_group_size") {
        join.max_group_size = parse_size(key, value, 1);
    } else if (key == "enumeration_cap") {
        join.enumeration_cap = parse_size(key, value, 1);
    } else if (key == "parser_batch") {
        parser_batch = parse_size(key, value, 1);
    } else if (key == "parser_backend") {
        parser_backend = parse_backend(key, value);
    } else if (key == "encoder_backend") {
        encoder_backend = parse_backend(key, value);
    } else if (key == "llm_backend") {
        llm_backend = parse_backend(key, value);
    } else if (key == "llm_base_url") {
        llm_base_url = std::string(value);
    } else if (key == "llm_model") {
        llm_model = std::string(value);
    } else if (key == "encoder_url") {
        encoder_url = std::string(value);
    } else if (key == "encoder_dimension") {
        encoder_dimension = static_cast<Eigen::Index>(parse_size(key, value, 1));
    } else if (key == "combined_judge_and_generate") {
        combined_judge_and_generate = parse_bool(key, value);
    } else if (key == "log_base") {
        if (value != "e" && value != "natural") {
            throw ConfigError("log_base is fixed to the natural logarithm");
        }
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void EngineConfig::validate() const {
    if (retrieval.eta < -1.0 || retrieval.eta > 1.0) {
        throw ConfigError("eta must lie in [-1, 1]");
    }
    if (retrieval.tau < 0.0 || retrieval.tau > 1.0) {
        throw ConfigError("tau must lie in [0, 1]");
    }
    bool needs_remote_llm = parser_backend == Backend::remote || llm_backend == Backend::remote;
    if (needs_remote_llm && (llm_base_url.empty() || llm_model.empty())) {
        throw ConfigError("remote LLM backend needs llm_base_url and llm_model");
    }
    if (encoder_backend == Backend::remote && encoder_url.empty()) {
        throw ConfigError("remote encoder backend needs encoder_url");
    }
}

EngineConfig parse_config(std::string_view text, EngineConfig base) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (!line.empty()) {
            auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
            }
            base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return base;
}

EngineConfig load_config(const std::filesystem::path& path, EngineConfig base) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    auto config = parse_config(text, std::move(base));
    auto dir = path.parent_path();
    for (auto* p : {&config.corpus_root, &config.index_path, &config.join_graph_path}) {
        if (!p->empty() && p->is_relative()) {
            *p = dir / *p;
        }
    }
    return config;
}

void apply_env_overrides(EngineConfig& config, const EnvLookup& lookup) {
    auto take = [&](const char* name, std::string& field) {
        if (auto v = lookup(name); v && !v->empty()) {
            field = *v;
        }
    };
    take("TABSCOUT_LLM_API_KEY", config.llm_api_key);
    take("TABSCOUT_LLM_BASE_URL", config.llm_base_url);
    take("TABSCOUT_LLM_MODEL", config.llm_model);
    take("TABSCOUT_ENCODER_URL", config.encoder_url);
    take("TABSCOUT_ENCODER_API_KEY", config.encoder_api_key);
}

std::optional<std::string> process_env(const char* name) {
    if (const char* v = std::getenv(name)) {
        return std::string(v);
    }
    return std::nullopt;
}

std::unique_ptr<Encoder> make_encoder(const EngineConfig& config) {
    if (config.encoder_backend == Backend::offline) {
        return std::make_unique<HashingEncoder>(config.encoder_dimension);
    }
    RemoteEncoderOptions options;
    options.url = config.encoder_url;
    options.dimension = config.encoder_dimension;
    options.api_key = config.encoder_api_key;
    return std::make_unique<RemoteEncoder>(std::move(options));
}

std::unique_ptr<ChatModel> make_chat_model(const EngineConfig& config) {
    if (config.llm_base_url.empty() || config.llm_model.empty()) {
        return nullptr;
    }
    RemoteChatOptions options;
    options.base_url = config.llm_base_url;
    options.model = config.llm_model;
    options.api_key = config.llm_api_key;
    return std::make_unique<RemoteChatModel>(std::move(options));
}

} // namespace tabscout
