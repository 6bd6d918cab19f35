#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "florafill/text.hpp"

namespace florafill {

enum class SpanLabel { non_descriptive = 0, descriptive = 1 };

std::string to_string(SpanLabel label);
SpanLabel span_label_from_string(std::string_view s);

struct Section {
    std::string header;
    std::string body;
};

// A downloaded source page already divided into header/body sections.
struct SectionedDocument {
    std::string source_id;               // source family, e.g. "wikipedia"
    std::optional<std::string> species;  // binomial when the page is about one
    std::vector<Section> sections;
};

// Token span of 10..512 tokens with its weak label.
struct LabeledSpan {
    std::vector<std::string> tokens;
    SpanLabel label = SpanLabel::non_descriptive;
    std::string source_id;
    std::optional<std::string> species;
};

inline constexpr std::size_t kMinSpanTokens = 10;
inline constexpr std::size_t kMaxSpanTokens = 512;

// Ordered header-pattern -> label table; first match wins, case-insensitive.
class HeaderRules {
public:
    HeaderRules() = default;
    // patterns are ECMAScript regexes matched anywhere in the header
    explicit HeaderRules(std::vector<std::pair<std::string, SpanLabel>> rules);

    std::optional<SpanLabel> match(std::string_view header) const;
    bool empty() const { return patterns_.empty(); }

    static HeaderRules defaults();
    static HeaderRules from_json(std::string_view json_text);
    static HeaderRules load(const std::filesystem::path& path);
    std::string to_json() const;

private:
    std::vector<std::pair<std::string, SpanLabel>> patterns_;
};

// Section bodies labeled by their header; unmatched sections are dropped.
std::vector<std::pair<std::string, SpanLabel>> label_sections(const SectionedDocument& doc,
                                                              const HeaderRules& rules);

// Random partition of the token stream into spans of 10..512 tokens. A final
// remainder shorter than 10 tokens is merged into the preceding span (and the
// merged span split in two equal halves if it would exceed 512). Texts with
// fewer than 10 tokens yield nothing.
std::vector<LabeledSpan> make_spans(std::string_view text, SpanLabel label, std::uint64_t rng_seed,
                                    std::string_view source_id = "",
                                    const std::optional<std::string>& species = std::nullopt);

// Sections of random non-species pages, all labeled non-descriptive.
std::vector<std::pair<std::string, SpanLabel>> augment_negatives(
    const std::vector<SectionedDocument>& random_docs);

struct CorpusCounts {
    std::size_t descriptive = 0;
    std::size_t non_descriptive = 0;
    std::size_t dropped_sections = 0;

    std::size_t total() const { return descriptive + non_descriptive; }
    double noise_ratio() const {
        return descriptive == 0 ? 0.0
                                : static_cast<double>(non_descriptive) / static_cast<double>(descriptive);
    }
};

struct Corpus {
    std::vector<LabeledSpan> train;
    std::vector<LabeledSpan> validation;
    std::vector<LabeledSpan> test;
    CorpusCounts counts;  // over all splits
};

struct CorpusOptions {
    // Sources whose documents feed train/validation; everything else goes to
    // the held-out test split.
    std::vector<std::string> train_sources = {"wikipedia", "powo"};
    double validation_fraction = 0.15;  // train:val = 85:15, by document
    std::uint64_t seed = 42;
};

// Full weak-labeling pass: label sections, spanify, split by source family.
Corpus build_corpus(const std::vector<SectionedDocument>& docs,
                    const std::vector<SectionedDocument>& random_docs, const HeaderRules& rules,
                    const CorpusOptions& options);

// JSONL: {"source_id":..., "species":..., "sections":[{"header":...,"body":...}]}
std::vector<SectionedDocument> load_sectioned_documents(const std::filesystem::path& path);

// JSONL: {"text":..., "label":..., "source_id":..., "species":...?}
void save_spans(const std::filesystem::path& path, const std::vector<LabeledSpan>& spans);
std::vector<LabeledSpan> load_spans(const std::filesystem::path& path);

}  // namespace florafill
