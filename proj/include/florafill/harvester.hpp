#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "florafill/robots.hpp"
#include "florafill/search.hpp"
#include "florafill/types.hpp"
#include "florafill/url.hpp"

namespace florafill {

struct FetchedDocument {
    Provenance provenance;
    int http_status = 0;
    std::string media_type;
    std::string body_text;    // extracted visible text, no markup
    std::string header_text;  // title + h1-h3 headings
};

enum class FetchStatus { ok, skipped_non_html, skipped_by_policy, error };

std::string to_string(FetchStatus status);

struct FetchResult {
    FetchStatus status = FetchStatus::error;
    FetchedDocument document;  // valid when status == ok
    std::string error;
    bool cache_hit = false;
};

struct FetcherOptions {
    std::filesystem::path cache_dir;
    std::string user_agent = "florafill/0.1 (+trait harvesting; contact via repository)";
    int max_retries = 3;
    double backoff_base_s = 1.0;
    double backoff_factor = 2.0;
    double per_domain_delay_s = 1.0;
    bool respect_robots = true;
    bool offline = false;                // never touch the network
    std::filesystem::path mock_root;     // resolves mock:// URLs
    std::int64_t mock_timestamp = 0;     // provenance timestamp for mock fetches
};

// Polite cached fetcher. Raw bodies are stored content-addressed under
// cache_dir/raw/<digest>; an index file maps url -> (digest, timestamp,
// status, media type), so re-runs re-extract from disk and keep the original
// fetch timestamps. Thread-safe; requests to one domain are serialized with
// a minimum spacing.
class Fetcher {
public:
    explicit Fetcher(FetcherOptions options);
    ~Fetcher();

    Fetcher(const Fetcher&) = delete;
    Fetcher& operator=(const Fetcher&) = delete;

    FetchResult fetch(const std::string& url);

    std::size_t network_requests() const { return network_requests_.load(); }

private:
    struct IndexEntry {
        std::string digest;
        std::int64_t timestamp = 0;
        int status = 0;
        std::string media_type;
    };
    struct DomainState {
        std::mutex mutex;
        std::chrono::steady_clock::time_point next_allowed{};
        bool robots_loaded = false;
        RobotsRules robots;
    };

    FetchResult fetch_uncached(const std::string& url);
    FetchResult fetch_mock(const std::string& url);
    FetchResult from_cache(const std::string& url, const IndexEntry& entry);
    DomainState& domain_state(const std::string& origin);
    bool robots_allow_locked(DomainState& state, const ParsedUrl& url);
    void store_index_entry(const std::string& url, const IndexEntry& entry);
    void wait_for_domain_slot(DomainState& state);

    FetcherOptions options_;
    std::filesystem::path index_path_;
    std::mutex index_mutex_;
    std::map<std::string, IndexEntry> index_;
    std::mutex memo_mutex_;
    std::map<std::string, FetchResult> run_memo_;
    std::mutex domains_mutex_;
    std::map<std::string, std::unique_ptr<DomainState>> domains_;
    std::atomic<std::size_t> network_requests_{0};
};

// True iff the case-folded binomial occurs in the case-folded header text.
bool header_filter(const FetchedDocument& doc, std::string_view binomial);

struct HarvestOptions {
    int url_limit = 20;
    int parallelism = 4;
};

struct HarvestOutcome {
    std::vector<FetchedDocument> documents;  // header-filtered, in rank order
    std::size_t hit_count = 0;
    std::size_t fetched = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t filtered_out = 0;
    std::vector<std::string> errors;  // per-document failures, non-fatal
};

// search -> fetch (bounded parallelism) -> header filter. Per-document
// failures are recorded, not fatal; only SearchBackendError propagates.
HarvestOutcome harvest_species(SearchBackend& backend, Fetcher& fetcher, std::string_view binomial,
                               const HarvestOptions& options = {});

}  // namespace florafill
