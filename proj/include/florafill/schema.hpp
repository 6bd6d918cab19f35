#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "florafill/common.hpp"

namespace florafill {

class UnknownTraitError : public Error {
public:
    explicit UnknownTraitError(std::string_view trait)
        : Error("unknown trait: \"" + std::string(trait) + "\"") {}
};

class UnknownValueError : public Error {
public:
    UnknownValueError(std::string_view trait, std::string_view value)
        : Error("unknown value \"" + std::string(value) + "\" for trait \"" + std::string(trait) + "\"") {}
};

struct Trait {
    std::string name;
    std::vector<std::string> values;
};

// Ordered trait -> allowed-values dictionary. Immutable after construction.
// Lookups match after whitespace collapsing and ASCII case-folding, so
// "alternate" finds the stored value "Alternate" but nothing looser.
class TraitSchema {
public:
    TraitSchema() = default;
    explicit TraitSchema(std::vector<Trait> traits);

    const std::vector<Trait>& traits() const { return traits_; }
    std::size_t size() const { return traits_.size(); }
    bool empty() const { return traits_.empty(); }
    const Trait& at(std::size_t i) const { return traits_.at(i); }

    std::optional<std::size_t> trait_index(std::string_view name) const;
    std::optional<std::size_t> value_index(std::size_t trait_idx, std::string_view value) const;

    // Throwing variants used by encoders.
    std::size_t require_trait(std::string_view name) const;
    std::size_t require_value(std::size_t trait_idx, std::string_view value) const;

    // Single-trait slice for the one-prompt-per-trait extraction mode.
    TraitSchema slice(std::string_view trait_name) const;

    // JSON document: one top-level mapping, trait name -> array of values.
    static TraitSchema from_json(std::string_view json_text);
    std::string to_json(int indent = -1) const;
    static TraitSchema load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    bool operator==(const TraitSchema& other) const;

private:
    std::vector<Trait> traits_;
    // canonical trait key -> index; per trait, canonical value key -> index
    std::vector<std::pair<std::string, std::size_t>> trait_keys_;
    std::vector<std::vector<std::pair<std::string, std::size_t>>> value_keys_;
};

}  // namespace florafill
