#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "florafill/common.hpp"
#include "florafill/text.hpp"

namespace florafill {

// Sparse vector as sorted unique (index, value) pairs.
using SparseVec = std::vector<std::pair<std::size_t, double>>;

std::vector<double> to_dense(const SparseVec& sparse, std::size_t dim);

// Fixed-dimension text embedder. Implementations must be deterministic per
// input; the trainer treats them as frozen (never mutated).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dim() const = 0;
    virtual SparseVec embed_sparse_tokens(const std::vector<std::string>& tokens) const = 0;
    virtual SparseVec embed_sparse(std::string_view text) const;

    std::vector<double> embed(std::string_view text) const;
    std::vector<double> embed_tokens(const std::vector<std::string>& tokens) const;
};

inline constexpr std::uint64_t kDefaultHashSeed = 0x464c4f52414649ULL;
inline constexpr std::size_t kDefaultEmbeddingDim = 4096;

// Signed feature hashing of token 1- and 2-grams, L2-normalized.
class HashedNgramProvider final : public EmbeddingProvider {
public:
    explicit HashedNgramProvider(std::size_t dim = kDefaultEmbeddingDim,
                                 std::uint64_t hash_seed = kDefaultHashSeed);

    std::size_t dim() const override { return dim_; }
    std::uint64_t hash_seed() const { return hash_seed_; }
    SparseVec embed_sparse_tokens(const std::vector<std::string>& tokens) const override;

private:
    std::size_t dim_;
    std::uint64_t hash_seed_;
};

// Precomputed vectors keyed by canonicalized text; JSONL of {"text", "vector"}.
// Stand-in for external encoders whose checkpoints live outside this repo.
class ExternalVectorProvider final : public EmbeddingProvider {
public:
    ExternalVectorProvider(std::size_t dim, std::vector<std::pair<std::string, std::vector<double>>> entries);
    static ExternalVectorProvider load(const std::filesystem::path& path);

    std::size_t dim() const override { return dim_; }
    SparseVec embed_sparse_tokens(const std::vector<std::string>& tokens) const override;
    SparseVec embed_sparse(std::string_view text) const override;

private:
    SparseVec lookup(const std::string& key) const;
    std::size_t dim_;
    std::vector<std::pair<std::string, std::vector<double>>> entries_;  // canonical key -> vector
};

}  // namespace florafill
