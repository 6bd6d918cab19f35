#include "florafill/matrix.hpp"

#include <map>

#include "florafill/csv.hpp"

namespace florafill {

const TraitCell& SpeciesTraitMatrix::cell(std::size_t species_idx, std::size_t trait_idx) const {
    if (species_idx >= species_.size() || trait_idx >= schema_.size())
        throw Error("matrix: cell index out of range");
    return cells_[species_idx * schema_.size() + trait_idx];
}

std::optional<std::size_t> SpeciesTraitMatrix::species_index(std::string_view name) const {
    std::string key = canonical_key(name);
    for (std::size_t i = 0; i < species_.size(); ++i)
        if (canonical_key(species_[i]) == key) return i;
    return std::nullopt;
}

std::size_t SpeciesTraitMatrix::covered_count() const {
    std::size_t covered = 0;
    for (const TraitCell& c : cells_)
        if (!c.na && c.any_set()) ++covered;
    return covered;
}

std::vector<TraitChoice> SpeciesTraitMatrix::decode_species(std::size_t species_idx) const {
    std::vector<TraitChoice> out;
    for (std::size_t t = 0; t < schema_.size(); ++t) {
        const TraitCell& c = cell(species_idx, t);
        if (c.na) continue;
        TraitChoice choice;
        choice.trait = schema_.at(t).name;
        for (std::size_t v = 0; v < c.bits.size(); ++v)
            if (c.bits[v]) choice.values.push_back(schema_.at(t).values[v]);
        out.push_back(std::move(choice));
    }
    return out;
}

std::string SpeciesTraitMatrix::to_csv() const {
    std::vector<std::string> header{"species"};
    for (const Trait& t : schema_.traits())
        for (const std::string& v : t.values) header.push_back(t.name + "::" + v);
    std::string out = csv::write_row(header);
    for (std::size_t s = 0; s < species_.size(); ++s) {
        std::vector<std::string> row{species_[s]};
        for (std::size_t t = 0; t < schema_.size(); ++t) {
            const TraitCell& c = cell(s, t);
            for (std::size_t v = 0; v < schema_.at(t).values.size(); ++v)
                row.push_back(c.na ? "NA" : (c.bits[v] ? "1" : "0"));
        }
        out += csv::write_row(row);
    }
    return out;
}

MatrixCsvResult SpeciesTraitMatrix::from_csv(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw Error("matrix csv: empty document");
    const auto& header = rows[0];
    if (header.empty() || canonical_key(header[0]) != "species")
        throw Error("matrix csv: first header column must be 'species'");

    // Columns appear grouped per trait; rebuild the schema from the header.
    std::vector<Trait> traits;
    std::vector<std::size_t> col_trait(header.size(), 0);
    std::vector<std::size_t> col_value(header.size(), 0);
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::size_t sep = header[c].find("::");
        if (sep == std::string::npos)
            throw Error("matrix csv: header column \"" + header[c] + "\" is not <trait>::<value>");
        std::string trait = header[c].substr(0, sep);
        std::string value = header[c].substr(sep + 2);
        if (traits.empty() || canonical_key(traits.back().name) != canonical_key(trait)) {
            for (const Trait& t : traits)
                if (canonical_key(t.name) == canonical_key(trait))
                    throw Error("matrix csv: columns of trait \"" + trait + "\" are not contiguous");
            traits.push_back(Trait{trait, {}});
        }
        col_trait[c] = traits.size() - 1;
        col_value[c] = traits.back().values.size();
        traits.back().values.push_back(value);
    }
    TraitSchema schema{std::move(traits)};

    MatrixBuilder builder(schema);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw Error("matrix csv: row " + std::to_string(r + 1) + " has " +
                        std::to_string(row.size()) + " fields, expected " +
                        std::to_string(header.size()));
        std::size_t s = builder.add_species(row[0]);
        std::vector<std::vector<std::uint8_t>> bits(schema.size());
        std::vector<std::vector<bool>> nas(schema.size());
        for (std::size_t t = 0; t < schema.size(); ++t)
            bits[t].resize(schema.at(t).values.size(), 0);
        std::vector<int> na_state(schema.size(), -1);  // -1 unseen, 0 numeric, 1 NA
        for (std::size_t c = 1; c < header.size(); ++c) {
            std::string field = trim(row[c]);
            std::size_t t = col_trait[c];
            if (casefold(field) == "na") {
                if (na_state[t] == 0)
                    throw Error("matrix csv: trait \"" + schema.at(t).name + "\" mixes NA and 0/1 for \"" +
                                row[0] + "\"");
                na_state[t] = 1;
            } else if (field == "0" || field == "1") {
                if (na_state[t] == 1)
                    throw Error("matrix csv: trait \"" + schema.at(t).name + "\" mixes NA and 0/1 for \"" +
                                row[0] + "\"");
                na_state[t] = 0;
                bits[t][col_value[c]] = field == "1" ? 1 : 0;
            } else {
                throw Error("matrix csv: bad cell \"" + field + "\" (expected 0, 1 or NA)");
            }
        }
        for (std::size_t t = 0; t < schema.size(); ++t)
            if (na_state[t] == 0) builder.set_cell(s, t, bits[t]);
    }
    MatrixCsvResult result;
    std::vector<std::string> normalized;
    result.matrix = std::move(builder).build(&normalized);
    for (const std::string& cell : normalized)
        result.warnings.push_back("all-zero row normalized to NA: " + cell);
    return result;
}

MatrixCsvResult SpeciesTraitMatrix::load(const std::filesystem::path& path) {
    return from_csv(read_file(path));
}

void SpeciesTraitMatrix::save(const std::filesystem::path& path) const {
    write_file(path, to_csv());
}

bool SpeciesTraitMatrix::operator==(const SpeciesTraitMatrix& other) const {
    if (!(schema_ == other.schema_) || species_ != other.species_) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].na != other.cells_[i].na) return false;
        if (!cells_[i].na && cells_[i].bits != other.cells_[i].bits) return false;
    }
    return true;
}

MatrixBuilder::MatrixBuilder(TraitSchema schema) : schema_(std::move(schema)) {}

std::size_t MatrixBuilder::add_species(std::string_view name) {
    std::string key = canonical_key(name);
    for (const auto& [k, idx] : species_keys_)
        if (k == key) return idx;
    species_.emplace_back(name);
    species_keys_.emplace_back(std::move(key), species_.size() - 1);
    cells_.resize(species_.size() * schema_.size());
    return species_.size() - 1;
}

void MatrixBuilder::set_value(std::size_t species_idx, std::string_view trait, std::string_view value) {
    std::size_t t = schema_.require_trait(trait);
    std::size_t v = schema_.require_value(t, value);
    TraitCell& c = cells_.at(species_idx * schema_.size() + t);
    if (c.na) {
        c.na = false;
        c.bits.assign(schema_.at(t).values.size(), 0);
    }
    c.bits[v] = 1;
}

void MatrixBuilder::set_cell(std::size_t species_idx, std::size_t trait_idx,
                             std::vector<std::uint8_t> bits) {
    if (trait_idx >= schema_.size()) throw Error("matrix: trait index out of range");
    if (bits.size() != schema_.at(trait_idx).values.size())
        throw Error("matrix: bit vector length mismatch for trait \"" + schema_.at(trait_idx).name +
                    "\"");
    TraitCell& c = cells_.at(species_idx * schema_.size() + trait_idx);
    c.na = false;
    c.bits = std::move(bits);
    for (auto& b : c.bits) b = b ? 1 : 0;
}

SpeciesTraitMatrix MatrixBuilder::build(std::vector<std::string>* normalized) && {
    for (std::size_t s = 0; s < species_.size(); ++s) {
        for (std::size_t t = 0; t < schema_.size(); ++t) {
            TraitCell& c = cells_[s * schema_.size() + t];
            if (!c.na && !c.any_set()) {
                c.na = true;
                c.bits.clear();
                if (normalized) normalized->push_back(species_[s] + " / " + schema_.at(t).name);
            }
        }
    }
    SpeciesTraitMatrix m;
    m.schema_ = std::move(schema_);
    m.species_ = std::move(species_);
    m.cells_ = std::move(cells_);
    return m;
}

SpeciesTraitMatrix binary_encode(const std::vector<SpeciesAnnotation>& annotations,
                                 const TraitSchema& schema) {
    MatrixBuilder builder(schema);
    for (const SpeciesAnnotation& ann : annotations) {
        std::size_t s = builder.add_species(ann.species);
        for (const TraitChoice& choice : ann.choices)
            for (const std::string& value : choice.values) builder.set_value(s, choice.trait, value);
    }
    return std::move(builder).build();
}

double coverage(const SpeciesTraitMatrix& matrix) {
    std::size_t total = matrix.cell_count();
    if (total == 0) return 0.0;
    return static_cast<double>(matrix.covered_count()) / static_cast<double>(total);
}

}  // namespace florafill
