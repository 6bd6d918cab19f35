#include "florafill/embedding.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace florafill {

std::vector<double> to_dense(const SparseVec& sparse, std::size_t dim) {
    std::vector<double> dense(dim, 0.0);
    for (const auto& [idx, val] : sparse) dense.at(idx) = val;
    return dense;
}

SparseVec EmbeddingProvider::embed_sparse(std::string_view text) const {
    return embed_sparse_tokens(tokenize(text));
}

std::vector<double> EmbeddingProvider::embed(std::string_view text) const {
    return to_dense(embed_sparse(text), dim());
}

std::vector<double> EmbeddingProvider::embed_tokens(const std::vector<std::string>& tokens) const {
    return to_dense(embed_sparse_tokens(tokens), dim());
}

HashedNgramProvider::HashedNgramProvider(std::size_t dim, std::uint64_t hash_seed)
    : dim_(dim), hash_seed_(hash_seed) {
    if (dim_ == 0) throw Error("embedding dim must be positive");
}

SparseVec HashedNgramProvider::embed_sparse_tokens(const std::vector<std::string>& tokens) const {
    SparseVec out;
    if (tokens.empty()) return out;

    std::vector<std::pair<std::size_t, double>> raw;
    raw.reserve(tokens.size() * 2);

    auto add = [&](const std::string& gram) {
        std::uint64_t h = fnv1a64(gram, hash_seed_);
        std::size_t bucket = static_cast<std::size_t>((h >> 1) % dim_);
        double sign = (h & 1) ? 1.0 : -1.0;
        raw.emplace_back(bucket, sign);
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add(tokens[i]);
        if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
    }

    std::sort(raw.begin(), raw.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [bucket, sign] : raw) {
        if (!out.empty() && out.back().first == bucket)
            out.back().second += sign;
        else
            out.emplace_back(bucket, sign);
    }
    // signs can cancel exactly; drop zeros so the norm is over true support
    std::erase_if(out, [](const auto& p) { return p.second == 0.0; });

    double norm_sq = 0.0;
    for (const auto& [_, v] : out) norm_sq += v * v;
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [_, v] : out) v *= inv;
    }
    return out;
}

ExternalVectorProvider::ExternalVectorProvider(
    std::size_t dim, std::vector<std::pair<std::string, std::vector<double>>> entries)
    : dim_(dim), entries_(std::move(entries)) {
    if (dim_ == 0) throw Error("embedding dim must be positive");
    for (auto& [key, vec] : entries_) {
        if (vec.size() != dim_)
            throw Error("external vector for \"" + key + "\" has dimension " +
                        std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
        key = canonical_key(key);
    }
}

ExternalVectorProvider ExternalVectorProvider::load(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::vector<double>>> entries;
    std::size_t dim = 0;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line);
        std::vector<double> vec = record.at("vector").get<std::vector<double>>();
        if (dim == 0) dim = vec.size();
        entries.emplace_back(record.at("text").get<std::string>(), std::move(vec));
    }
    if (dim == 0) throw Error("external vector file is empty: " + path.string());
    return ExternalVectorProvider(dim, std::move(entries));
}

SparseVec ExternalVectorProvider::lookup(const std::string& key) const {
    for (const auto& [k, vec] : entries_) {
        if (k == key) {
            SparseVec out;
            out.reserve(vec.size());
            for (std::size_t i = 0; i < vec.size(); ++i)
                if (vec[i] != 0.0) out.emplace_back(i, vec[i]);
            return out;
        }
    }
    throw Error("no precomputed embedding for text: \"" + key + "\"");
}

SparseVec ExternalVectorProvider::embed_sparse_tokens(const std::vector<std::string>& tokens) const {
    return lookup(canonical_key(join_tokens(tokens)));
}

SparseVec ExternalVectorProvider::embed_sparse(std::string_view text) const {
    return lookup(canonical_key(text));
}

}  // namespace florafill
