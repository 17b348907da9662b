#include "tabscout/chat_model.hpp"

#include <json.hpp>

#include "tabscout/http.hpp"

namespace tabscout {

RemoteChatModel::RemoteChatModel(RemoteChatOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty() || options_.model.empty()) {
        throw ConfigError("remote chat model needs base_url and model");
    }
    while (!options_.base_url.empty() && options_.base_url.back() == '/') {
        options_.base_url.pop_back();
    }
}

std::string RemoteChatModel::complete(const std::string& prompt) {
    return with_retry(options_.retry, [&] { return complete_once(prompt); });
}

std::string RemoteChatModel::complete_once(const std::string& prompt) {
    using nlohmann::json;
    json request{
        {"model", options_.model},
        {"temperature", options_.temperature},
        {"max_tokens", options_.max_tokens},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };
    std::vector<std::pair<std::string, std::string>> headers;
    if (!options_.api_key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + options_.api_key);
    }
    http::Response response;
    try {
        response = http::post_json(options_.base_url + "/chat/completions", request.dump(), headers, options_.timeout);
    } catch (const IoError& e) {
        throw LlmFailure(e.what());
    }
    if (response.status != 200) {
        throw LlmFailure("chat completion returned HTTP " + std::to_string(response.status));
    }
    try {
        auto reply = json::parse(response.body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw LlmFailure(std::string("malformed chat completion reply: ") + e.what());
    }
}

} // namespace tabscout
