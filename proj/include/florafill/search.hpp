#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "florafill/common.hpp"

namespace florafill {

class MalformedBinomialError : public Error {
public:
    explicit MalformedBinomialError(std::string_view binomial)
        : Error("not a binomial (expected exactly genus + epithet): \"" + std::string(binomial) +
                "\"") {}
};

class SearchBackendError : public Error {
public:
    explicit SearchBackendError(const std::string& msg) : Error("search backend: " + msg) {}
};

struct SearchHit {
    int rank = 0;  // 1-based
    std::string url;
    std::string title;
};

// Truncate "Hedera helix L." to the two-token binomial.
std::string strip_authority(std::string_view species_line);

// Exact-phrase query: the binomial wrapped in double quotes.
std::string build_query(std::string_view binomial);

class SearchBackend {
public:
    virtual ~SearchBackend() = default;
    virtual std::vector<SearchHit> search(const std::string& query, int limit) = 0;
};

// Web search over HTTP: GET {endpoint}?q=<query>&limit=<n> with the API key
// in an X-API-Key header; expects {"results":[{"url":...,"title":...},...]}.
// Results are cached on disk by (query, UTC day).
class HttpSearchBackend final : public SearchBackend {
public:
    HttpSearchBackend(std::string endpoint_url, std::string api_key,
                      std::filesystem::path cache_dir, int max_retries = 3,
                      double backoff_base_s = 1.0);

    // endpoint/key from SEARCH_API_URL / SEARCH_API_KEY
    static HttpSearchBackend from_env(std::filesystem::path cache_dir);

    std::vector<SearchHit> search(const std::string& query, int limit) override;

private:
    std::string endpoint_url_;
    std::string api_key_;
    std::filesystem::path cache_dir_;
    int max_retries_;
    double backoff_base_s_;
};

// Fixture-corpus search: a directory of HTML files plus an index.json mapping
// query -> ranked file list (strings, or {"file":...,"title":...} objects).
// Hits point at mock://<file> URLs resolved by the fetcher.
class MockSearchBackend final : public SearchBackend {
public:
    explicit MockSearchBackend(std::filesystem::path corpus_dir);

    std::vector<SearchHit> search(const std::string& query, int limit) override;

private:
    std::filesystem::path corpus_dir_;
    std::vector<std::pair<std::string, std::vector<SearchHit>>> index_;  // by canonical query
};

}  // namespace florafill
