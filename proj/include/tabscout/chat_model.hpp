#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "tabscout/error.hpp"

namespace tabscout {

/// Single-turn text completion. Implementations throw LlmFailure.
class ChatModel {
  public:
    virtual ~ChatModel() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const std::string& prompt) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

/// Runs `fn` until it succeeds or the policy is exhausted; the last
/// exception is rethrown. Backoff doubles between attempts by default.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const Error&) {
            if (attempt >= policy.max_attempts) {
                throw;
            }
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
}

struct RemoteChatOptions {
    std::string base_url; ///< e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key;
    double temperature = 0.0;
    int max_tokens = 512;
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
};

/// OpenAI-style chat-completion client (POST {base_url}/chat/completions).
class RemoteChatModel final : public ChatModel {
  public:
    explicit RemoteChatModel(RemoteChatOptions options);

    std::string id() const override { return "remote:" + options_.model; }
    std::string complete(const std::string& prompt) override;

  private:
    std::string complete_once(const std::string& prompt);

    RemoteChatOptions options_;
};

/// Adapts a callable; used for deterministic mocks.
class FunctionChatModel final : public ChatModel {
  public:
    using Fn = std::function<std::string(const std::string&)>;

    FunctionChatModel(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}

    std::string id() const override { return id_; }
    std::string complete(const std::string& prompt) override { return fn_(prompt); }

  private:
    std::string id_;
    Fn fn_;
};

} // namespace tabscout
