#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "florafill/schema.hpp"

namespace florafill {

// One (species, trait) cell: NA, or one presence bit per allowed value.
struct TraitCell {
    bool na = true;
    std::vector<std::uint8_t> bits;  // size == value count when !na

    bool any_set() const {
        for (auto b : bits)
            if (b) return true;
        return false;
    }
};

struct TraitChoice {
    std::string trait;
    std::vector<std::string> values;
};

struct SpeciesAnnotation {
    std::string species;
    std::vector<TraitChoice> choices;
};

struct MatrixCsvResult;

// Binary presence/absence cube over species x trait x value, immutable after
// construction. An all-zeros cell is normalized to NA by the builder, so
// "non-NA" and "at least one value found" coincide.
class SpeciesTraitMatrix {
public:
    SpeciesTraitMatrix() = default;

    const std::vector<std::string>& species() const { return species_; }
    const TraitSchema& schema() const { return schema_; }
    const TraitCell& cell(std::size_t species_idx, std::size_t trait_idx) const;
    std::optional<std::size_t> species_index(std::string_view name) const;

    std::size_t cell_count() const { return species_.size() * schema_.size(); }
    std::size_t covered_count() const;

    // 1-bit positions of one row, traits with NA omitted.
    std::vector<TraitChoice> decode_species(std::size_t species_idx) const;

    // CSV layout: header `species,<trait>::<value>,...`, cells 0/1/NA.
    std::string to_csv() const;
    static MatrixCsvResult from_csv(std::string_view text);
    static MatrixCsvResult load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    bool operator==(const SpeciesTraitMatrix& other) const;

private:
    friend class MatrixBuilder;
    TraitSchema schema_;
    std::vector<std::string> species_;
    std::vector<TraitCell> cells_;  // species-major, schema_.size() per species
};

class MatrixBuilder {
public:
    explicit MatrixBuilder(TraitSchema schema);

    // Returns the species row index; repeated names reuse the existing row.
    std::size_t add_species(std::string_view name);

    void set_value(std::size_t species_idx, std::string_view trait, std::string_view value);
    void set_cell(std::size_t species_idx, std::size_t trait_idx, std::vector<std::uint8_t> bits);

    // Normalizes all-zero cells to NA; names of normalized cells are appended
    // to `normalized` when provided.
    SpeciesTraitMatrix build(std::vector<std::string>* normalized = nullptr) &&;

private:
    TraitSchema schema_;
    std::vector<std::string> species_;
    std::vector<std::pair<std::string, std::size_t>> species_keys_;
    std::vector<TraitCell> cells_;
};

struct MatrixCsvResult {
    SpeciesTraitMatrix matrix;
    std::vector<std::string> warnings;  // e.g. all-zero rows normalized to NA
};

SpeciesTraitMatrix binary_encode(const std::vector<SpeciesAnnotation>& annotations,
                                 const TraitSchema& schema);

// Fraction of (species, trait) cells with at least one value found.
double coverage(const SpeciesTraitMatrix& matrix);

}  // namespace florafill
