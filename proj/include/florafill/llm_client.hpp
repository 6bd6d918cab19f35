#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "florafill/common.hpp"

namespace florafill {

class LlmTransportError : public Error {
public:
    explicit LlmTransportError(const std::string& msg) : Error("LlmTransportError: " + msg) {}
};

class LlmRefusalError : public Error {
public:
    explicit LlmRefusalError(const std::string& model_id)
        : Error("LlmRefusal: empty completion from " + model_id) {}
};

struct LlmClientConfig {
    std::string endpoint_url;  // chat-completion endpoint; "mock" selects the oracle backend
    std::string api_key_env = "LLM_API_KEY";
    std::string model_id = "mistral-medium";
    double temperature = 0.0;
    int max_retries = 3;
    double backoff_base_s = 1.0;
    double timeout_s = 120.0;
    std::size_t context_limit = 32768;   // tokens
    std::size_t output_reserve = 2048;   // tokens kept free for the completion
    double requests_per_minute = 0.0;    // global throttle; 0 disables
    std::optional<std::uint64_t> seed;   // forwarded when the API supports it
};

// Rough byte-based token count used for context budgeting.
std::size_t estimate_tokens(std::string_view text);

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const std::string& prompt, const LlmClientConfig& cfg) = 0;
};

// POST {endpoint} with {"model","messages":[{"role":"user","content"}],
// "temperature"}; returns choices[0].message.content. Retries with
// exponential backoff on transport errors, 429 and 5xx.
class HttpLlmBackend final : public LlmBackend {
public:
    std::string complete(const std::string& prompt, const LlmClientConfig& cfg) override;
};

// Deterministic oracle: answers the trait dictionary found in the prompt,
// setting evidence 1 exactly when the case-folded value string occurs in the
// prompt's input text block. Output uses the parenthesized-tuple notation.
class MockLlmBackend final : public LlmBackend {
public:
    std::string complete(const std::string& prompt, const LlmClientConfig& cfg) override;
};

std::unique_ptr<LlmBackend> make_llm_backend(const LlmClientConfig& cfg);

struct LlmCallResult {
    std::string completion;
    bool cache_hit = false;
};

// Content-addressed completion cache keyed by (prompt, model_id).
class LlmClient {
public:
    LlmClient(std::unique_ptr<LlmBackend> backend, LlmClientConfig cfg,
              std::filesystem::path cache_dir);

    LlmCallResult call(const std::string& prompt);
    const LlmClientConfig& config() const { return cfg_; }

private:
    std::unique_ptr<LlmBackend> backend_;
    LlmClientConfig cfg_;
    std::filesystem::path cache_dir_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_request_{};
};

}  // namespace florafill
