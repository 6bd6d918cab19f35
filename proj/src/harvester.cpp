#include "florafill/harvester.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "florafill/html_text.hpp"

namespace florafill {

namespace {
using nlohmann::json;

bool is_html_media(std::string_view media_type) {
    std::string mt = casefold(media_type);
    return mt.find("text/html") != std::string::npos ||
           mt.find("application/xhtml") != std::string::npos;
}

std::int64_t now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}
}  // namespace

std::string to_string(FetchStatus status) {
    switch (status) {
        case FetchStatus::ok: return "ok";
        case FetchStatus::skipped_non_html: return "skipped_non_html";
        case FetchStatus::skipped_by_policy: return "skipped_by_policy";
        case FetchStatus::error: return "error";
    }
    return "error";
}

Fetcher::Fetcher(FetcherOptions options) : options_(std::move(options)) {
    if (options_.cache_dir.empty()) throw Error("fetcher: cache_dir is required");
    index_path_ = options_.cache_dir / "fetch_index.json";
    if (auto text = try_read_file(index_path_)) {
        json doc = json::parse(*text);
        for (const auto& [url, entry] : doc.items()) {
            IndexEntry e;
            e.digest = entry.at("digest").get<std::string>();
            e.timestamp = entry.at("timestamp").get<std::int64_t>();
            e.status = entry.at("status").get<int>();
            e.media_type = entry.value("media_type", "");
            index_[url] = std::move(e);
        }
    }
}

Fetcher::~Fetcher() = default;

FetchResult Fetcher::fetch(const std::string& url) {
    {
        std::lock_guard lock(memo_mutex_);
        auto it = run_memo_.find(url);
        if (it != run_memo_.end()) {
            FetchResult memo = it->second;
            memo.cache_hit = true;
            return memo;
        }
    }
    FetchResult result;
    if (starts_with(url, "mock://")) {
        result = fetch_mock(url);
    } else {
        IndexEntry entry;
        bool cached = false;
        {
            std::lock_guard lock(index_mutex_);
            auto it = index_.find(url);
            if (it != index_.end()) {
                entry = it->second;
                cached = true;
            }
        }
        result = cached ? from_cache(url, entry) : fetch_uncached(url);
    }
    {
        std::lock_guard lock(memo_mutex_);
        run_memo_[url] = result;
    }
    return result;
}

FetchResult Fetcher::fetch_mock(const std::string& url) {
    FetchResult result;
    std::string rel = url.substr(std::string_view("mock://").size());
    std::filesystem::path file = options_.mock_root / rel;
    auto body = try_read_file(file);
    if (!body) {
        result.status = FetchStatus::error;
        result.error = "mock corpus file not found: " + file.string();
        return result;
    }
    std::string ext = casefold(file.extension().string());
    if (ext != ".html" && ext != ".htm") {
        result.status = FetchStatus::skipped_non_html;
        result.error = "non-HTML mock file";
        return result;
    }
    ExtractedText text = extract_html_text(*body);
    result.status = FetchStatus::ok;
    result.document.provenance = Provenance{url, options_.mock_timestamp, fnv1a64(*body)};
    result.document.http_status = 200;
    result.document.media_type = "text/html";
    result.document.body_text = std::move(text.body);
    result.document.header_text = std::move(text.header);
    return result;
}

FetchResult Fetcher::from_cache(const std::string& url, const IndexEntry& entry) {
    FetchResult result;
    result.cache_hit = true;
    if (!is_html_media(entry.media_type)) {
        result.status = FetchStatus::skipped_non_html;
        result.error = "cached media type: " + entry.media_type;
        return result;
    }
    auto body = try_read_file(options_.cache_dir / "raw" / entry.digest);
    if (!body) {
        result.status = FetchStatus::error;
        result.error = "cache index entry without body file (digest " + entry.digest + ")";
        return result;
    }
    ExtractedText text = extract_html_text(*body);
    result.status = FetchStatus::ok;
    result.document.provenance = Provenance{url, entry.timestamp, fnv1a64(*body)};
    result.document.http_status = entry.status;
    result.document.media_type = entry.media_type;
    result.document.body_text = std::move(text.body);
    result.document.header_text = std::move(text.header);
    return result;
}

Fetcher::DomainState& Fetcher::domain_state(const std::string& origin) {
    std::lock_guard lock(domains_mutex_);
    auto& slot = domains_[origin];
    if (!slot) slot = std::make_unique<DomainState>();
    return *slot;
}

void Fetcher::wait_for_domain_slot(DomainState& state) {
    auto now = std::chrono::steady_clock::now();
    if (state.next_allowed > now) std::this_thread::sleep_until(state.next_allowed);
    state.next_allowed = std::chrono::steady_clock::now() +
                         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(options_.per_domain_delay_s));
}

bool Fetcher::robots_allow_locked(DomainState& state, const ParsedUrl& url) {
    if (!options_.respect_robots) return true;
    if (!state.robots_loaded) {
        state.robots_loaded = true;
        wait_for_domain_slot(state);
        httplib::Client client(url.origin());
        client.set_follow_location(true);
        httplib::Headers headers{{"User-Agent", options_.user_agent}};
        auto res = client.Get("/robots.txt", headers);
        ++network_requests_;
        // unreachable or non-200 robots file: allow-all
        if (res && res->status == 200) state.robots = parse_robots_txt(res->body, options_.user_agent);
    }
    return robots_allows(state.robots, url.path);
}

FetchResult Fetcher::fetch_uncached(const std::string& url) {
    FetchResult result;
    if (options_.offline) {
        result.status = FetchStatus::error;
        result.error = "offline mode: uncached URL " + url;
        return result;
    }
    ParsedUrl parsed;
    try {
        parsed = parse_url(url);
    } catch (const Error& e) {
        result.status = FetchStatus::error;
        result.error = e.what();
        return result;
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parsed.scheme == "https") {
        result.status = FetchStatus::error;
        result.error = "https requires an OpenSSL-enabled build: " + url;
        return result;
    }
#endif

    DomainState& state = domain_state(parsed.origin());
    std::lock_guard domain_lock(state.mutex);

    if (!robots_allow_locked(state, parsed)) {
        result.status = FetchStatus::skipped_by_policy;
        result.error = "disallowed by robots.txt";
        return result;
    }

    httplib::Result res;
    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = options_.backoff_base_s *
                           std::pow(options_.backoff_factor, static_cast<double>(attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        wait_for_domain_slot(state);
        httplib::Client client(parsed.origin());
        client.set_follow_location(true);
        httplib::Headers headers{{"User-Agent", options_.user_agent}};
        res = client.Get(parsed.path, headers);
        ++network_requests_;
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        break;
    }
    if (!res || res->status == 429 || res->status >= 500) {
        result.status = FetchStatus::error;
        result.error = last_error + " fetching " + url;
        return result;
    }
    if (res->status >= 400) {
        result.status = FetchStatus::error;
        result.error = "HTTP " + std::to_string(res->status) + " fetching " + url;
        return result;
    }

    std::string media_type = res->get_header_value("Content-Type");
    if (media_type.empty()) media_type = "text/html";
    IndexEntry entry;
    entry.timestamp = now_unix();
    entry.status = res->status;
    entry.media_type = media_type;
    entry.digest = hex64(fnv1a64(res->body));

    if (!is_html_media(media_type)) {
        store_index_entry(url, entry);
        result.status = FetchStatus::skipped_non_html;
        result.error = "media type: " + media_type;
        return result;
    }

    write_file(options_.cache_dir / "raw" / entry.digest, res->body);
    store_index_entry(url, entry);

    ExtractedText text = extract_html_text(res->body);
    result.status = FetchStatus::ok;
    result.document.provenance = Provenance{url, entry.timestamp, fnv1a64(res->body)};
    result.document.http_status = res->status;
    result.document.media_type = media_type;
    result.document.body_text = std::move(text.body);
    result.document.header_text = std::move(text.header);
    return result;
}

void Fetcher::store_index_entry(const std::string& url, const IndexEntry& entry) {
    std::lock_guard lock(index_mutex_);
    index_[url] = entry;
    json doc = json::object();
    for (const auto& [u, e] : index_) {
        doc[u] = {{"digest", e.digest},
                  {"timestamp", e.timestamp},
                  {"status", e.status},
                  {"media_type", e.media_type}};
    }
    write_file(index_path_, doc.dump(2) + "\n");
}

bool header_filter(const FetchedDocument& doc, std::string_view binomial) {
    return contains_casefold(doc.header_text, binomial);
}

HarvestOutcome harvest_species(SearchBackend& backend, Fetcher& fetcher, std::string_view binomial,
                               const HarvestOptions& options) {
    std::string query = build_query(binomial);
    std::vector<SearchHit> hits = backend.search(query, options.url_limit);

    HarvestOutcome outcome;
    outcome.hit_count = hits.size();

    // dedupe URLs, keep the best rank
    std::vector<SearchHit> unique;
    for (const SearchHit& hit : hits) {
        bool seen = false;
        for (const SearchHit& u : unique) seen = seen || u.url == hit.url;
        if (!seen) unique.push_back(hit);
    }

    std::vector<FetchResult> results(unique.size());
    int workers = std::max(1, std::min<int>(options.parallelism, static_cast<int>(unique.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < unique.size(); ++i) results[i] = fetcher.fetch(unique[i].url);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= unique.size()) return;
                    results[i] = fetcher.fetch(unique[i].url);
                }
            });
        }
        for (std::thread& t : threads) t.join();
    }

    // deterministic merge in rank order
    for (std::size_t i = 0; i < unique.size(); ++i) {
        FetchResult& r = results[i];
        switch (r.status) {
            case FetchStatus::ok:
                ++outcome.fetched;
                if (header_filter(r.document, binomial)) {
                    outcome.documents.push_back(std::move(r.document));
                } else {
                    ++outcome.filtered_out;
                }
                break;
            case FetchStatus::skipped_non_html:
            case FetchStatus::skipped_by_policy:
                ++outcome.skipped;
                outcome.errors.push_back(unique[i].url + ": " + to_string(r.status));
                break;
            case FetchStatus::error:
                ++outcome.failed;
                outcome.errors.push_back(unique[i].url + ": " + r.error);
                break;
        }
    }
    return outcome;
}

}  // namespace florafill
