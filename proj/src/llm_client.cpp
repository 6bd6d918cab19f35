#include "florafill/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "florafill/extractor.hpp"
#include "florafill/url.hpp"

namespace florafill {

namespace {
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
}

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

// ---------------------------------------------------------------------------
// HttpLlmBackend
// ---------------------------------------------------------------------------

std::string HttpLlmBackend::complete(const std::string& prompt, const LlmClientConfig& cfg) {
    if (cfg.endpoint_url.empty())
        throw LlmTransportError("no endpoint URL configured");
    ParsedUrl endpoint = parse_url(cfg.endpoint_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.scheme == "https")
        throw LlmTransportError("https requires an OpenSSL-enabled build: " + cfg.endpoint_url);
#endif

    json body{{"model", cfg.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", cfg.temperature}};
    if (cfg.seed) body["random_seed"] = *cfg.seed;

    const char* key = cfg.api_key_env.empty() ? nullptr : std::getenv(cfg.api_key_env.c_str());

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = cfg.backoff_base_s * std::pow(2.0, static_cast<double>(attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(endpoint.origin());
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
        httplib::Headers headers{{"Content-Type", "application/json"}};
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
        auto res = client.Post(endpoint.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw LlmTransportError("HTTP " + std::to_string(res->status) + " from " +
                                    cfg.endpoint_url);
        try {
            json doc = json::parse(res->body);
            std::string content =
                doc.at("choices").at(0).at("message").at("content").get<std::string>();
            if (trim(content).empty()) throw LlmRefusalError(cfg.model_id);
            return content;
        } catch (const json::exception& e) {
            throw LlmTransportError("unparseable completion payload from " + cfg.endpoint_url +
                                    ": " + e.what());
        }
    }
    throw LlmTransportError(last_error + " after " + std::to_string(cfg.max_retries + 1) +
                            " attempts contacting " + cfg.endpoint_url);
}

// ---------------------------------------------------------------------------
// MockLlmBackend
// ---------------------------------------------------------------------------

std::string MockLlmBackend::complete(const std::string& prompt, const LlmClientConfig&) {
    constexpr std::string_view input_marker = "Input text:";
    constexpr std::string_view dict_marker = "Initial dictionary of traits with all possible values:";

    std::size_t input_at = prompt.find(input_marker);
    std::size_t dict_at = prompt.find(dict_marker);
    if (input_at == std::string::npos || dict_at == std::string::npos || dict_at < input_at)
        throw LlmTransportError("mock backend: prompt does not follow the expected template");

    std::string input_text =
        prompt.substr(input_at + input_marker.size(), dict_at - input_at - input_marker.size());
    std::string input_cf = casefold(input_text);

    auto dict_text = extract_first_json_object(std::string_view(prompt).substr(dict_at));
    if (!dict_text) throw LlmTransportError("mock backend: no trait dictionary in prompt");
    ordered_json dict = ordered_json::parse(jsonish_to_json(*dict_text), nullptr, false);
    if (dict.is_discarded() || !dict.is_object())
        throw LlmTransportError("mock backend: unparseable trait dictionary");

    // evidence 1 iff the case-folded value string occurs in the input text
    std::string out = "{\n";
    bool first_trait = true;
    for (const auto& [trait, values] : dict.items()) {
        if (!first_trait) out += ",\n";
        first_trait = false;
        out += ordered_json(trait).dump() + ": [\n";
        bool first_value = true;
        for (const auto& v : values) {
            if (!first_value) out += ",\n";
            first_value = false;
            std::string value = v.get<std::string>();
            int bit = input_cf.find(casefold(value)) != std::string::npos ? 1 : 0;
            out += "(" + ordered_json(value).dump() + ", " + std::to_string(bit) + ")";
        }
        out += "]";
    }
    out += "\n}";
    return out;
}

std::unique_ptr<LlmBackend> make_llm_backend(const LlmClientConfig& cfg) {
    if (canonical_key(cfg.endpoint_url) == "mock" || canonical_key(cfg.model_id) == "mock")
        return std::make_unique<MockLlmBackend>();
    return std::make_unique<HttpLlmBackend>();
}

// ---------------------------------------------------------------------------
// LlmClient
// ---------------------------------------------------------------------------

LlmClient::LlmClient(std::unique_ptr<LlmBackend> backend, LlmClientConfig cfg,
                     std::filesystem::path cache_dir)
    : backend_(std::move(backend)), cfg_(std::move(cfg)), cache_dir_(std::move(cache_dir)) {}

LlmCallResult LlmClient::call(const std::string& prompt) {
    std::string digest = hex64(fnv1a64(cfg_.model_id + std::string(1, '\0') + prompt));
    std::filesystem::path cache_file = cache_dir_ / "llm" / (digest + ".txt");
    {
        std::lock_guard lock(mutex_);
        if (auto cached = try_read_file(cache_file)) return {*cached, true};
    }
    if (cfg_.requests_per_minute > 0.0) {
        std::unique_lock lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        if (next_request_ > now) {
            auto wake = next_request_;
            lock.unlock();
            std::this_thread::sleep_until(wake);
            lock.lock();
        }
        next_request_ = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(60.0 / cfg_.requests_per_minute));
    }
    std::string completion = backend_->complete(prompt, cfg_);
    {
        std::lock_guard lock(mutex_);
        write_file(cache_file, completion);
    }
    return {completion, false};
}

}  // namespace florafill
