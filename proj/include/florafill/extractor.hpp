#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "florafill/llm_client.hpp"
#include "florafill/matrix.hpp"
#include "florafill/types.hpp"

namespace florafill {

class ContextOverflowError : public Error {
public:
    ContextOverflowError(std::size_t needed, std::size_t budget)
        : Error("prompt needs ~" + std::to_string(needed) + " tokens, budget is " +
                std::to_string(budget)) {}
};

class UnparseableResponseError : public Error {
public:
    UnparseableResponseError() : Error("UnparseableResponse: no JSON object found in completion") {}
};

struct PromptBundle {
    std::string species;
    std::string input_text;  // one descriptive sentence per line
    TraitSchema schema_slice;
    std::string rendered;
};

// Renders the fixed instruction template around the species name, the input
// text block and the trait dictionary. Sentences are ordered by descending
// score (ties by url, then text) and exact duplicates dropped. Throws
// ContextOverflowError when the estimate exceeds context_limit minus the
// output reserve.
PromptBundle build_prompt(const std::string& species, const std::vector<ScoredSentence>& sentences,
                          const TraitSchema& schema_slice, const LlmClientConfig& cfg = {});

struct TraitEvidence {
    std::string trait;
    std::vector<std::pair<std::string, std::uint8_t>> values;  // slice order, every value once
};

struct ExtractionResult {
    std::string species;
    std::vector<TraitEvidence> traits;
    std::string raw_response;
    std::string model_id;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    std::size_t hallucination_count = 0;  // out-of-schema names/values dropped
};

// Strict parse of a completion: first JSON-like object, tolerating code
// fences, single quotes and (value, bit) tuple notation. Out-of-schema trait
// names and values are dropped and counted; missing in-schema values default
// to evidence 0. Throws UnparseableResponseError when no object is found.
ExtractionResult parse_response(const std::string& raw, const TraitSchema& schema_slice);

// Canonical response text in the tuple notation (the inverse of
// parse_response for well-formed results).
std::string render_response(const ExtractionResult& result);

// Helpers shared with the mock backend.
std::optional<std::string> extract_first_json_object(std::string_view raw);
std::string jsonish_to_json(std::string_view jsonish);

struct MatrixRow {
    std::string species;
    std::vector<TraitCell> cells;  // aligned with the full schema
};

// Merges per-call results into one row; a trait with evidence for none of its
// values becomes NA.
MatrixRow to_matrix_row(const std::vector<ExtractionResult>& results, const TraitSchema& schema);

SpeciesTraitMatrix rows_to_matrix(const std::vector<MatrixRow>& rows, const TraitSchema& schema);

enum class ExtractionMode { all_traits, single_trait };

std::string to_string(ExtractionMode mode);
ExtractionMode extraction_mode_from_string(std::string_view s);

struct CallAudit {
    std::string species;
    ExtractionMode mode = ExtractionMode::all_traits;
    std::string model_id;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    bool cache_hit = false;
    std::size_t hallucination_count = 0;
};

struct SpeciesExtraction {
    MatrixRow row;
    std::vector<CallAudit> calls;
    std::size_t duplicate_sentences_dropped = 0;
    std::vector<std::string> warnings;  // overflow shrinking, unparseable calls
};

// One call in all_traits mode, one per trait in single_trait mode. On context
// overflow the lowest-score sentences are dropped until the prompt fits.
// Unparseable completions leave the affected traits NA.
SpeciesExtraction extract_species(const std::string& species,
                                  const std::vector<ScoredSentence>& sentences,
                                  const TraitSchema& schema, ExtractionMode mode, LlmClient& client);

}  // namespace florafill
