#include "florafill/extractor.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;

std::string quote_key(const std::string& s) { return ordered_json(s).dump(); }

std::string single_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string render_schema_block(const TraitSchema& slice) {
    std::string out = "{";
    for (std::size_t t = 0; t < slice.size(); ++t) {
        if (t) out += ",\n";
        const Trait& trait = slice.at(t);
        out += quote_key(trait.name) + ": [";
        for (std::size_t v = 0; v < trait.values.size(); ++v) {
            if (v) out += ", ";
            out += single_quote(trait.values[v]);
        }
        out += "]";
    }
    out += "}";
    return out;
}

// Instruction paragraphs fixed by the prompt template, including its exact
// punctuation.
constexpr std::string_view kPreamble1 =
    "We are interested in obtaining botanical trait information about the species ";
constexpr std::string_view kPreamble2 =
    "We will provide an input text with botanical descriptions, followed by a dictionary where "
    "each key 'name' represents a trait name, referring to specific organ or other element of the "
    "plant, and is associated to a list with all possible trait values for that trait, "
    "['value_1', 'value_2', ..., 'value_n'].";
constexpr std::string_view kInputHeader = "Input text:";
constexpr std::string_view kDictionaryHeader = "Initial dictionary of traits with all possible values:";
constexpr std::string_view kInstructions =
    "Turn each string s in the list of values in the dictionary into a sublist (s,b), where b is "
    "a binary number,either 0 or 1, indicating whether there is strong evidence for value s in "
    "the input text. Double check that 'value_i' is reported referring to trait 'name' in the "
    "text, and not to a different trait. Always set 'b' to '0' if you are not 100% sure about the "
    "association. Do not add new trait values and do not modify the initial ones.Return the "
    "dictionary of traits and sublists of (value, evidence) containing all possible names and "
    "(values, evidence) tuples.";
constexpr std::string_view kOutputDirective =
    "Output only a dictionary in JSON format, no other text at all.";

}  // namespace

PromptBundle build_prompt(const std::string& species, const std::vector<ScoredSentence>& sentences,
                          const TraitSchema& schema_slice, const LlmClientConfig& cfg) {
    if (sentences.empty()) throw Error("build_prompt: no sentences for species \"" + species + "\"");
    if (schema_slice.empty()) throw Error("build_prompt: empty schema slice");

    std::vector<ScoredSentence> ordered = sentences;
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.url != b.url) return a.url < b.url;
        return a.sentence < b.sentence;
    });

    PromptBundle bundle;
    bundle.species = species;
    bundle.schema_slice = schema_slice;
    for (const ScoredSentence& s : ordered) {
        std::string text = collapse_whitespace(s.sentence);
        if (text.empty()) continue;
        if (!bundle.input_text.empty()) bundle.input_text += "\n";
        bundle.input_text += text;
    }
    if (bundle.input_text.empty())
        throw Error("build_prompt: no sentences for species \"" + species + "\"");

    std::string rendered;
    rendered += std::string(kPreamble1) + species + ".";
    rendered += "\n\n";
    rendered += kPreamble2;
    rendered += "\n\n";
    rendered += std::string(kInputHeader) + "\n" + bundle.input_text;
    rendered += "\n\n";
    rendered += std::string(kDictionaryHeader) + "\n" + render_schema_block(schema_slice);
    rendered += "\n\n";
    rendered += kInstructions;
    rendered += "\n\n";
    rendered += kOutputDirective;
    bundle.rendered = std::move(rendered);

    std::size_t needed = estimate_tokens(bundle.rendered);
    if (cfg.context_limit > 0) {
        std::size_t budget =
            cfg.context_limit > cfg.output_reserve ? cfg.context_limit - cfg.output_reserve : 0;
        if (needed > budget) throw ContextOverflowError(needed, budget);
    }
    return bundle;
}

std::optional<std::string> extract_first_json_object(std::string_view raw) {
    std::size_t begin = raw.find('{');
    if (begin == std::string_view::npos) return std::nullopt;
    int depth = 0;
    char quote = 0;
    for (std::size_t i = begin; i < raw.size(); ++i) {
        char c = raw[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return std::string(raw.substr(begin, i - begin + 1));
        }
    }
    return std::nullopt;
}

std::string jsonish_to_json(std::string_view jsonish) {
    std::string out;
    out.reserve(jsonish.size());
    enum class State { plain, double_quoted, single_quoted } state = State::plain;
    for (std::size_t i = 0; i < jsonish.size(); ++i) {
        char c = jsonish[i];
        switch (state) {
            case State::plain:
                if (c == '(') out.push_back('[');
                else if (c == ')') out.push_back(']');
                else if (c == '\'') {
                    state = State::single_quoted;
                    out.push_back('"');
                } else {
                    if (c == '"') state = State::double_quoted;
                    out.push_back(c);
                }
                break;
            case State::double_quoted:
                if (c == '\\' && i + 1 < jsonish.size()) {
                    out.push_back(c);
                    out.push_back(jsonish[++i]);
                } else {
                    if (c == '"') state = State::plain;
                    out.push_back(c);
                }
                break;
            case State::single_quoted:
                if (c == '\\' && i + 1 < jsonish.size()) {
                    char next = jsonish[++i];
                    if (next == '\'') {
                        out.push_back('\'');
                    } else {
                        out.push_back('\\');
                        out.push_back(next);
                    }
                } else if (c == '\'') {
                    state = State::plain;
                    out.push_back('"');
                } else if (c == '"') {
                    out += "\\\"";
                } else {
                    out.push_back(c);
                }
                break;
        }
    }
    return out;
}

namespace {
std::uint8_t parse_bit(const ordered_json& value) {
    if (value.is_boolean()) return value.get<bool>() ? 1 : 0;
    if (value.is_number_integer()) return value.get<std::int64_t>() != 0 ? 1 : 0;
    if (value.is_number_float()) return value.get<double>() != 0.0 ? 1 : 0;
    if (value.is_string()) {
        std::string s = trim(value.get<std::string>());
        if (s == "1") return 1;
        if (s == "0") return 0;
    }
    return 0;  // "Always set 'b' to '0' if you are not 100% sure"
}
}  // namespace

ExtractionResult parse_response(const std::string& raw, const TraitSchema& schema_slice) {
    auto object_text = extract_first_json_object(raw);
    if (!object_text) throw UnparseableResponseError();

    ordered_json doc = ordered_json::parse(jsonish_to_json(*object_text), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw UnparseableResponseError();

    ExtractionResult result;
    result.raw_response = raw;
    result.traits.reserve(schema_slice.size());
    for (std::size_t t = 0; t < schema_slice.size(); ++t) {
        TraitEvidence te;
        te.trait = schema_slice.at(t).name;
        for (const std::string& v : schema_slice.at(t).values) te.values.emplace_back(v, 0);
        result.traits.push_back(std::move(te));
    }

    for (const auto& [key, entry] : doc.items()) {
        auto trait_idx = schema_slice.trait_index(key);
        if (!trait_idx) {
            ++result.hallucination_count;
            continue;
        }
        if (!entry.is_array()) continue;
        for (const auto& element : entry) {
            if (!element.is_array() || element.empty() || !element[0].is_string()) continue;
            std::string value = element[0].get<std::string>();
            auto value_idx = schema_slice.value_index(*trait_idx, value);
            if (!value_idx) {
                ++result.hallucination_count;
                continue;
            }
            std::uint8_t bit = element.size() >= 2 ? parse_bit(element[1]) : 0;
            result.traits[*trait_idx].values[*value_idx].second = bit;
        }
    }
    return result;
}

std::string render_response(const ExtractionResult& result) {
    std::string out = "{\n";
    for (std::size_t t = 0; t < result.traits.size(); ++t) {
        const TraitEvidence& te = result.traits[t];
        out += quote_key(te.trait) + ": [\n";
        for (std::size_t v = 0; v < te.values.size(); ++v) {
            out += "(" + quote_key(te.values[v].first) + ", " + std::to_string(int(te.values[v].second)) + ")";
            out += v + 1 < te.values.size() ? ",\n" : "]";
        }
        out += t + 1 < result.traits.size() ? ",\n" : "\n";
    }
    out += "}";
    return out;
}

MatrixRow to_matrix_row(const std::vector<ExtractionResult>& results, const TraitSchema& schema) {
    MatrixRow row;
    row.cells.assign(schema.size(), TraitCell{});
    for (const ExtractionResult& result : results) {
        if (row.species.empty()) row.species = result.species;
        for (const TraitEvidence& te : result.traits) {
            std::size_t t = schema.require_trait(te.trait);
            TraitCell& cell = row.cells[t];
            if (cell.na) {
                cell.na = false;
                cell.bits.assign(schema.at(t).values.size(), 0);
            }
            for (const auto& [value, bit] : te.values) {
                std::size_t v = schema.require_value(t, value);
                if (bit) cell.bits[v] = 1;
            }
        }
    }
    // "no evidence for any of the accepted trait values" is an NA
    for (TraitCell& cell : row.cells) {
        if (!cell.na && !cell.any_set()) {
            cell.na = true;
            cell.bits.clear();
        }
    }
    return row;
}

SpeciesTraitMatrix rows_to_matrix(const std::vector<MatrixRow>& rows, const TraitSchema& schema) {
    MatrixBuilder builder(schema);
    for (const MatrixRow& row : rows) {
        std::size_t s = builder.add_species(row.species);
        for (std::size_t t = 0; t < row.cells.size(); ++t)
            if (!row.cells[t].na) builder.set_cell(s, t, row.cells[t].bits);
    }
    return std::move(builder).build();
}

std::string to_string(ExtractionMode mode) {
    return mode == ExtractionMode::all_traits ? "all_traits" : "single_trait";
}

ExtractionMode extraction_mode_from_string(std::string_view s) {
    std::string key = canonical_key(s);
    if (key == "all_traits" || key == "all-traits" || key == "all") return ExtractionMode::all_traits;
    if (key == "single_trait" || key == "single-trait" || key == "single")
        return ExtractionMode::single_trait;
    throw Error("unknown extraction mode: \"" + std::string(s) + "\"");
}

namespace {

// Drops lowest-score sentences until the prompt fits the context budget.
std::optional<PromptBundle> build_prompt_shrinking(const std::string& species,
                                                   std::vector<ScoredSentence> sentences,
                                                   const TraitSchema& slice,
                                                   const LlmClientConfig& cfg,
                                                   std::vector<std::string>& warnings) {
    std::stable_sort(sentences.begin(), sentences.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.url != b.url) return a.url < b.url;
        return a.sentence < b.sentence;
    });
    std::size_t dropped = 0;
    while (!sentences.empty()) {
        try {
            PromptBundle bundle = build_prompt(species, sentences, slice, cfg);
            if (dropped > 0)
                warnings.push_back(species + ": dropped " + std::to_string(dropped) +
                                   " lowest-score sentences to fit the context window");
            return bundle;
        } catch (const ContextOverflowError&) {
            sentences.pop_back();
            ++dropped;
        }
    }
    warnings.push_back(species + ": no sentence subset fits the context window");
    return std::nullopt;
}

}  // namespace

SpeciesExtraction extract_species(const std::string& species,
                                  const std::vector<ScoredSentence>& sentences,
                                  const TraitSchema& schema, ExtractionMode mode, LlmClient& client) {
    SpeciesExtraction extraction;
    extraction.row.species = species;
    extraction.row.cells.assign(schema.size(), TraitCell{});

    // exact duplicates (after whitespace collapsing) are dropped and counted
    std::vector<ScoredSentence> unique;
    for (const ScoredSentence& s : sentences) {
        std::string text = collapse_whitespace(s.sentence);
        if (text.empty()) continue;
        bool seen = false;
        for (const ScoredSentence& u : unique) seen = seen || collapse_whitespace(u.sentence) == text;
        if (seen) ++extraction.duplicate_sentences_dropped;
        else unique.push_back(s);
    }
    if (unique.empty()) {
        extraction.warnings.push_back(species + ": no sentences available, all traits NA");
        return extraction;
    }

    std::vector<TraitSchema> slices;
    if (mode == ExtractionMode::all_traits) {
        slices.push_back(schema);
    } else {
        for (const Trait& t : schema.traits()) slices.push_back(schema.slice(t.name));
    }

    std::vector<ExtractionResult> results;
    for (const TraitSchema& slice : slices) {
        auto bundle = build_prompt_shrinking(species, unique, slice, client.config(),
                                             extraction.warnings);
        if (!bundle) continue;

        LlmCallResult call = client.call(bundle->rendered);

        CallAudit audit;
        audit.species = species;
        audit.mode = mode;
        audit.model_id = client.config().model_id;
        audit.input_tokens = estimate_tokens(bundle->rendered);
        audit.output_tokens = estimate_tokens(call.completion);
        audit.cache_hit = call.cache_hit;

        try {
            ExtractionResult result = parse_response(call.completion, slice);
            result.species = species;
            result.model_id = client.config().model_id;
            result.input_tokens = audit.input_tokens;
            result.output_tokens = audit.output_tokens;
            audit.hallucination_count = result.hallucination_count;
            results.push_back(std::move(result));
        } catch (const UnparseableResponseError& e) {
            extraction.warnings.push_back(species + ": " + e.what() + "; affected traits left NA");
        }
        extraction.calls.push_back(audit);
    }

    MatrixRow merged = to_matrix_row(results, schema);
    merged.species = species;
    extraction.row = std::move(merged);
    extraction.row.species = species;
    return extraction;
}

}  // namespace florafill
