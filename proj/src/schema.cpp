#include "florafill/schema.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;

std::size_t lookup(const std::vector<std::pair<std::string, std::size_t>>& keys, std::string_view name,
                   bool& found) {
    std::string key = canonical_key(name);
    for (const auto& [k, idx] : keys) {
        if (k == key) {
            found = true;
            return idx;
        }
    }
    found = false;
    return 0;
}
}  // namespace

TraitSchema::TraitSchema(std::vector<Trait> traits) : traits_(std::move(traits)) {
    trait_keys_.reserve(traits_.size());
    value_keys_.resize(traits_.size());
    for (std::size_t t = 0; t < traits_.size(); ++t) {
        const Trait& trait = traits_[t];
        if (trim(trait.name).empty()) throw Error("schema: empty trait name");
        if (trait.values.size() < 2)
            throw Error("schema: trait \"" + trait.name + "\" needs at least 2 allowed values");
        std::string tkey = canonical_key(trait.name);
        for (const auto& [k, _] : trait_keys_)
            if (k == tkey) throw Error("schema: duplicate trait name \"" + trait.name + "\"");
        trait_keys_.emplace_back(std::move(tkey), t);
        value_keys_[t].reserve(trait.values.size());
        for (std::size_t v = 0; v < trait.values.size(); ++v) {
            if (trim(trait.values[v]).empty())
                throw Error("schema: empty value in trait \"" + trait.name + "\"");
            std::string vkey = canonical_key(trait.values[v]);
            for (const auto& [k, _] : value_keys_[t])
                if (k == vkey)
                    throw Error("schema: duplicate value \"" + trait.values[v] + "\" in trait \"" +
                                trait.name + "\"");
            value_keys_[t].emplace_back(std::move(vkey), v);
        }
    }
}

std::optional<std::size_t> TraitSchema::trait_index(std::string_view name) const {
    bool found = false;
    std::size_t idx = lookup(trait_keys_, name, found);
    if (!found) return std::nullopt;
    return idx;
}

std::optional<std::size_t> TraitSchema::value_index(std::size_t trait_idx, std::string_view value) const {
    bool found = false;
    std::size_t idx = lookup(value_keys_.at(trait_idx), value, found);
    if (!found) return std::nullopt;
    return idx;
}

std::size_t TraitSchema::require_trait(std::string_view name) const {
    auto idx = trait_index(name);
    if (!idx) throw UnknownTraitError(name);
    return *idx;
}

std::size_t TraitSchema::require_value(std::size_t trait_idx, std::string_view value) const {
    auto idx = value_index(trait_idx, value);
    if (!idx) throw UnknownValueError(traits_[trait_idx].name, value);
    return *idx;
}

TraitSchema TraitSchema::slice(std::string_view trait_name) const {
    std::size_t t = require_trait(trait_name);
    return TraitSchema({traits_[t]});
}

TraitSchema TraitSchema::from_json(std::string_view json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    if (!doc.is_object()) throw Error("schema: top-level JSON value must be a mapping");
    std::vector<Trait> traits;
    for (auto& [name, values] : doc.items()) {
        if (!values.is_array()) throw Error("schema: trait \"" + name + "\" must map to an array");
        Trait trait;
        trait.name = name;
        for (const auto& v : values) {
            if (!v.is_string()) throw Error("schema: non-string value in trait \"" + name + "\"");
            trait.values.push_back(v.get<std::string>());
        }
        traits.push_back(std::move(trait));
    }
    return TraitSchema(std::move(traits));
}

std::string TraitSchema::to_json(int indent) const {
    ordered_json doc = ordered_json::object();
    for (const Trait& t : traits_) doc[t.name] = t.values;
    return doc.dump(indent);
}

TraitSchema TraitSchema::load(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

void TraitSchema::save(const std::filesystem::path& path) const {
    write_file(path, to_json(2) + "\n");
}

bool TraitSchema::operator==(const TraitSchema& other) const {
    if (traits_.size() != other.traits_.size()) return false;
    for (std::size_t t = 0; t < traits_.size(); ++t) {
        if (traits_[t].name != other.traits_[t].name) return false;
        if (traits_[t].values != other.traits_[t].values) return false;
    }
    return true;
}

}  // namespace florafill
