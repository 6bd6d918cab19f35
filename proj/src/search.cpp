#include "florafill/search.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "florafill/url.hpp"

namespace florafill {

namespace {
using nlohmann::json;
}

ParsedUrl parse_url(std::string_view url) {
    ParsedUrl out;
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw Error("not an absolute URL: " + std::string(url));
    out.scheme = casefold(url.substr(0, scheme_end));
    if (out.scheme != "http" && out.scheme != "https" && out.scheme != "mock")
        throw Error("unsupported URL scheme: " + std::string(url));
    std::string_view rest = url.substr(scheme_end + 3);
    std::size_t path_begin = rest.find('/');
    std::string_view authority = path_begin == std::string_view::npos ? rest : rest.substr(0, path_begin);
    out.path = path_begin == std::string_view::npos ? "/" : std::string(rest.substr(path_begin));
    std::size_t colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        out.host = casefold(authority.substr(0, colon));
        out.port = std::string(authority.substr(colon + 1));
    } else {
        out.host = casefold(authority);
    }
    if (out.host.empty() && out.scheme != "mock") throw Error("URL has no host: " + std::string(url));
    return out;
}

std::string url_encode(std::string_view value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

std::string strip_authority(std::string_view species_line) {
    auto tokens = split_ws(species_line);
    if (tokens.size() >= 2) return tokens[0] + " " + tokens[1];
    return tokens.empty() ? std::string() : tokens[0];
}

std::string build_query(std::string_view binomial) {
    auto tokens = split_ws(binomial);
    if (tokens.size() != 2) throw MalformedBinomialError(binomial);
    return "\"" + tokens[0] + " " + tokens[1] + "\"";
}

// ---------------------------------------------------------------------------
// HttpSearchBackend
// ---------------------------------------------------------------------------

HttpSearchBackend::HttpSearchBackend(std::string endpoint_url, std::string api_key,
                                     std::filesystem::path cache_dir, int max_retries,
                                     double backoff_base_s)
    : endpoint_url_(std::move(endpoint_url)),
      api_key_(std::move(api_key)),
      cache_dir_(std::move(cache_dir)),
      max_retries_(max_retries),
      backoff_base_s_(backoff_base_s) {
    if (endpoint_url_.empty()) throw SearchBackendError("no endpoint URL configured");
}

HttpSearchBackend HttpSearchBackend::from_env(std::filesystem::path cache_dir) {
    const char* url = std::getenv("SEARCH_API_URL");
    const char* key = std::getenv("SEARCH_API_KEY");
    if (!url || !*url) throw SearchBackendError("SEARCH_API_URL is not set");
    return HttpSearchBackend(url, key ? key : "", std::move(cache_dir));
}

std::vector<SearchHit> HttpSearchBackend::search(const std::string& query, int limit) {
    if (limit < 1) throw SearchBackendError("limit must be >= 1");

    auto now = std::chrono::system_clock::now();
    std::int64_t day = std::chrono::duration_cast<std::chrono::hours>(now.time_since_epoch()).count() / 24;
    std::filesystem::path cache_file =
        cache_dir_ / "search" / (hex64(fnv1a64(query + "\n" + std::to_string(day))) + ".json");

    std::string body;
    if (auto cached = try_read_file(cache_file)) {
        body = *cached;
    } else {
        ParsedUrl endpoint = parse_url(endpoint_url_);
        std::string target = endpoint.path;
        target += target.find('?') == std::string::npos ? '?' : '&';
        target += "q=" + url_encode(query) + "&limit=" + std::to_string(limit);

        std::string last_error;
        for (int attempt = 0; attempt <= max_retries_; ++attempt) {
            if (attempt > 0) {
                double delay = backoff_base_s_ * static_cast<double>(1 << (attempt - 1));
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            httplib::Client client(endpoint.origin());
            client.set_follow_location(true);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("X-API-Key", api_key_);
            auto res = client.Get(target, headers);
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw SearchBackendError("HTTP " + std::to_string(res->status) + " from " +
                                         endpoint_url_);
            body = res->body;
            break;
        }
        if (body.empty() && !last_error.empty())
            throw SearchBackendError(last_error + " from " + endpoint_url_);
        write_file(cache_file, body);
    }

    std::vector<SearchHit> hits;
    try {
        json doc = json::parse(body);
        const json& results = doc.contains("results") ? doc["results"] : doc;
        int rank = 0;
        for (const auto& r : results) {
            if (static_cast<int>(hits.size()) >= limit) break;
            SearchHit hit;
            hit.rank = ++rank;
            hit.url = r.at("url").get<std::string>();
            hit.title = r.value("title", "");
            hits.push_back(std::move(hit));
        }
    } catch (const json::exception& e) {
        throw SearchBackendError(std::string("unparseable response: ") + e.what());
    }
    return hits;
}

// ---------------------------------------------------------------------------
// MockSearchBackend
// ---------------------------------------------------------------------------

MockSearchBackend::MockSearchBackend(std::filesystem::path corpus_dir)
    : corpus_dir_(std::move(corpus_dir)) {
    std::filesystem::path index_path = corpus_dir_ / "index.json";
    json doc;
    try {
        doc = json::parse(read_file(index_path));
    } catch (const std::exception& e) {
        throw SearchBackendError("cannot load mock index " + index_path.string() + ": " + e.what());
    }
    for (const auto& [query, files] : doc.items()) {
        std::vector<SearchHit> hits;
        int rank = 0;
        for (const auto& f : files) {
            SearchHit hit;
            hit.rank = ++rank;
            if (f.is_string()) {
                hit.url = "mock://" + f.get<std::string>();
                hit.title = f.get<std::string>();
            } else {
                hit.url = "mock://" + f.at("file").get<std::string>();
                hit.title = f.value("title", f.at("file").get<std::string>());
            }
            hits.push_back(std::move(hit));
        }
        index_.emplace_back(canonical_key(query), std::move(hits));
    }
}

std::vector<SearchHit> MockSearchBackend::search(const std::string& query, int limit) {
    if (limit < 1) throw SearchBackendError("limit must be >= 1");
    std::string key = canonical_key(query);
    for (const auto& [q, hits] : index_) {
        if (q == key) {
            std::vector<SearchHit> out = hits;
            if (static_cast<int>(out.size()) > limit) out.resize(static_cast<std::size_t>(limit));
            return out;
        }
    }
    return {};
}

}  // namespace florafill
