#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "florafill/embedding.hpp"
#include "florafill/matrix.hpp"
#include "florafill/types.hpp"

namespace florafill {

class SchemaMismatchError : public Error {
public:
    explicit SchemaMismatchError(const std::string& msg) : Error("SchemaMismatch: " + msg) {}
};

class EmptyStudyError : public Error {
public:
    EmptyStudyError() : Error("EmptyStudy: no records to score") {}
};

struct EvalCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

struct TraitScore {
    std::string trait;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double coverage = 0.0;  // fraction of species with a value found for this trait
    EvalCounts counts;
    std::size_t evaluated_cells = 0;
};

// Dataset-level comparison of a predicted matrix against a reference one.
// Micro-aggregated over the trait-value bits of predicted-covered cells;
// cells that are NA in the reference are excluded (counted as unverifiable).
struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double coverage = 0.0;
    EvalCounts counts;
    std::vector<TraitScore> per_trait;
    std::size_t unverifiable = 0;
    double macro_precision = 0.0;  // over traits with evaluated cells
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    bool defined = false;  // false when prediction covers nothing verifiable

    std::string to_json(int indent = 2) const;
    std::string to_text() const;  // aligned human-readable table
};

EvalReport score_matrix(const SpeciesTraitMatrix& pred, const SpeciesTraitMatrix& ref);
std::vector<TraitScore> per_trait_scores(const SpeciesTraitMatrix& pred,
                                         const SpeciesTraitMatrix& ref);
std::string per_trait_csv(const std::vector<TraitScore>& scores);

enum class CooccurrenceKind { annotation_annotation, annotation_prediction };

struct CooccurrenceMatrix {
    std::string trait;
    std::vector<std::string> labels;
    std::vector<std::vector<std::size_t>> counts;  // square
    CooccurrenceKind kind = CooccurrenceKind::annotation_annotation;

    std::string to_csv() const;
    std::string to_svg() const;  // simple heatmap
};

// C[i][j] = number of species with value_i and value_j both set; symmetric,
// diagonal equals per-value counts. NA cells are skipped.
CooccurrenceMatrix cooccurrence(const SpeciesTraitMatrix& matrix, std::string_view trait);

// X[i][j] = number of species with reference value_i set and predicted
// value_j set; species with an NA cell on either side are skipped.
CooccurrenceMatrix cross_cooccurrence(const SpeciesTraitMatrix& ref, const SpeciesTraitMatrix& pred,
                                      std::string_view trait);

struct FnStudyRecord {
    std::string trait;
    std::string species;
    std::string snippet;
    bool gt_found = false;   // expert says the trait is inferable from the snippet
    bool llm_found = false;  // extraction reported any value
};

struct ClassOutcome {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ConfusionReport {
    // counts[gt][llm]: 0 = missing, 1 = found
    std::size_t gt_missing_llm_missing = 0;
    std::size_t gt_missing_llm_found = 0;
    std::size_t gt_found_llm_missing = 0;
    std::size_t gt_found_llm_found = 0;
    ClassOutcome positive;  // "found" class
    ClassOutcome negative;  // "missing" class
    double macro_f1 = 0.0;

    std::string to_json(int indent = 2) const;
    std::string to_text() const;
};

ConfusionReport binary_confusion(const std::vector<FnStudyRecord>& records);

// The k snippets whose embeddings are closest (cosine distance) to the trait
// name embedding; ties broken by (species, url, sentence).
std::vector<ScoredSentence> select_snippets(std::string_view trait,
                                            const std::vector<std::string>& species_pool,
                                            const std::vector<ScoredSentence>& sentence_store,
                                            const EmbeddingProvider& provider, std::size_t k);

// FN-study input CSV: trait, species, snippet, expert_verdict (can_infer /
// cannot_infer).
struct FnStudyInput {
    std::string trait;
    std::string species;
    std::string snippet;
    bool can_infer = false;
};
std::vector<FnStudyInput> load_fn_study_csv(const std::filesystem::path& path);

}  // namespace florafill
