#include "florafill/weak_label.hpp"

#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "florafill/common.hpp"

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;
using nlohmann::json;
}  // namespace

std::string to_string(SpanLabel label) {
    return label == SpanLabel::descriptive ? "descriptive" : "non_descriptive";
}

SpanLabel span_label_from_string(std::string_view s) {
    std::string key = canonical_key(s);
    if (key == "descriptive") return SpanLabel::descriptive;
    if (key == "non_descriptive" || key == "non-descriptive") return SpanLabel::non_descriptive;
    throw Error("unknown span label: \"" + std::string(s) + "\"");
}

HeaderRules::HeaderRules(std::vector<std::pair<std::string, SpanLabel>> rules)
    : patterns_(std::move(rules)) {
    for (const auto& [pattern, _] : patterns_) {
        // validate eagerly so a bad rules file fails at load, not per header
        std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
        (void)re;
    }
}

std::optional<SpanLabel> HeaderRules::match(std::string_view header) const {
    std::string h(header);
    for (const auto& [pattern, label] : patterns_) {
        std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
        if (std::regex_search(h, re)) return label;
    }
    return std::nullopt;
}

HeaderRules HeaderRules::defaults() {
    return HeaderRules({
        {"description", SpanLabel::descriptive},
        {"appearance", SpanLabel::descriptive},
        {"characteristic", SpanLabel::descriptive},
        {"morpholog", SpanLabel::descriptive},
        {"introduction", SpanLabel::non_descriptive},
        {"habitat", SpanLabel::non_descriptive},
        {"distribution", SpanLabel::non_descriptive},
        {"uses", SpanLabel::non_descriptive},
        {"ecology", SpanLabel::non_descriptive},
        {"control", SpanLabel::non_descriptive},
        {"etymology", SpanLabel::non_descriptive},
    });
}

HeaderRules HeaderRules::from_json(std::string_view json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    if (!doc.is_object()) throw Error("header rules: top-level JSON value must be a mapping");
    std::vector<std::pair<std::string, SpanLabel>> rules;
    for (auto& [pattern, label] : doc.items())
        rules.emplace_back(pattern, span_label_from_string(label.get<std::string>()));
    return HeaderRules(std::move(rules));
}

HeaderRules HeaderRules::load(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

std::string HeaderRules::to_json() const {
    ordered_json doc = ordered_json::object();
    for (const auto& [pattern, label] : patterns_) doc[pattern] = to_string(label);
    return doc.dump(2);
}

std::vector<std::pair<std::string, SpanLabel>> label_sections(const SectionedDocument& doc,
                                                              const HeaderRules& rules) {
    if (rules.empty()) throw Error("label_sections: empty rule table");
    std::vector<std::pair<std::string, SpanLabel>> out;
    for (const Section& section : doc.sections) {
        auto label = rules.match(section.header);
        if (!label) continue;
        out.emplace_back(section.body, *label);
    }
    return out;
}

std::vector<LabeledSpan> make_spans(std::string_view text, SpanLabel label, std::uint64_t rng_seed,
                                    std::string_view source_id,
                                    const std::optional<std::string>& species) {
    std::vector<std::string> tokens = tokenize(text);
    std::vector<LabeledSpan> spans;
    if (tokens.size() < kMinSpanTokens) return spans;

    Rng rng(rng_seed);
    std::size_t pos = 0;
    auto emit = [&](std::size_t begin, std::size_t end) {
        LabeledSpan span;
        span.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                           tokens.begin() + static_cast<std::ptrdiff_t>(end));
        span.label = label;
        span.source_id = std::string(source_id);
        span.species = species;
        spans.push_back(std::move(span));
    };

    while (tokens.size() - pos >= kMinSpanTokens) {
        std::size_t len = static_cast<std::size_t>(
            rng.next_int(static_cast<std::int64_t>(kMinSpanTokens), static_cast<std::int64_t>(kMaxSpanTokens)));
        len = std::min(len, tokens.size() - pos);
        emit(pos, pos + len);
        pos += len;
    }

    std::size_t remainder = tokens.size() - pos;
    if (remainder > 0) {
        // merge into the previous span; rebalance if the merge leaves [10,512]
        LabeledSpan last = std::move(spans.back());
        spans.pop_back();
        for (std::size_t i = pos; i < tokens.size(); ++i) last.tokens.push_back(tokens[i]);
        if (last.tokens.size() > kMaxSpanTokens) {
            std::size_t half = last.tokens.size() / 2;
            LabeledSpan first = last;
            first.tokens.assign(last.tokens.begin(), last.tokens.begin() + static_cast<std::ptrdiff_t>(half));
            last.tokens.erase(last.tokens.begin(), last.tokens.begin() + static_cast<std::ptrdiff_t>(half));
            spans.push_back(std::move(first));
        }
        spans.push_back(std::move(last));
    }
    return spans;
}

std::vector<std::pair<std::string, SpanLabel>> augment_negatives(
    const std::vector<SectionedDocument>& random_docs) {
    std::vector<std::pair<std::string, SpanLabel>> out;
    for (const SectionedDocument& doc : random_docs)
        for (const Section& section : doc.sections)
            out.emplace_back(section.body, SpanLabel::non_descriptive);
    return out;
}

Corpus build_corpus(const std::vector<SectionedDocument>& docs,
                    const std::vector<SectionedDocument>& random_docs, const HeaderRules& rules,
                    const CorpusOptions& options) {
    Corpus corpus;
    Rng split_rng(options.seed);

    auto is_train_source = [&](const std::string& source_id) {
        std::string key = canonical_key(source_id);
        for (const std::string& s : options.train_sources)
            if (canonical_key(s) == key) return true;
        return false;
    };

    std::size_t doc_index = 0;
    auto add_document = [&](const SectionedDocument& doc, bool force_negative) {
        std::vector<std::pair<std::string, SpanLabel>> labeled;
        if (force_negative) {
            for (const Section& section : doc.sections)
                labeled.emplace_back(section.body, SpanLabel::non_descriptive);
        } else {
            labeled = label_sections(doc, rules);
            corpus.counts.dropped_sections += doc.sections.size() - labeled.size();
        }

        std::vector<LabeledSpan>* dest;
        if (!is_train_source(doc.source_id)) {
            dest = &corpus.test;
        } else {
            dest = split_rng.next_double() < options.validation_fraction ? &corpus.validation
                                                                         : &corpus.train;
        }
        for (std::size_t s = 0; s < labeled.size(); ++s) {
            const auto& [body, label] = labeled[s];
            std::uint64_t span_seed = fnv1a64(doc.source_id, options.seed) ^ (doc_index * 0x9e3779b9ULL) ^ s;
            auto spans = make_spans(body, label, span_seed, doc.source_id, doc.species);
            for (LabeledSpan& span : spans) {
                if (span.label == SpanLabel::descriptive)
                    ++corpus.counts.descriptive;
                else
                    ++corpus.counts.non_descriptive;
                dest->push_back(std::move(span));
            }
        }
        ++doc_index;
    };

    for (const SectionedDocument& doc : docs) add_document(doc, false);
    for (const SectionedDocument& doc : random_docs) add_document(doc, true);
    return corpus;
}

std::vector<SectionedDocument> load_sectioned_documents(const std::filesystem::path& path) {
    std::vector<SectionedDocument> docs;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json record = json::parse(line);
        SectionedDocument doc;
        doc.source_id = record.at("source_id").get<std::string>();
        if (record.contains("species") && record["species"].is_string())
            doc.species = record["species"].get<std::string>();
        for (const auto& s : record.at("sections"))
            doc.sections.push_back(
                Section{s.at("header").get<std::string>(), s.at("body").get<std::string>()});
        docs.push_back(std::move(doc));
    }
    return docs;
}

void save_spans(const std::filesystem::path& path, const std::vector<LabeledSpan>& spans) {
    std::ostringstream out;
    for (const LabeledSpan& span : spans) {
        ordered_json record;
        record["text"] = join_tokens(span.tokens);
        record["label"] = to_string(span.label);
        record["source_id"] = span.source_id;
        if (span.species) record["species"] = *span.species;
        out << record.dump() << "\n";
    }
    write_file(path, out.str());
}

std::vector<LabeledSpan> load_spans(const std::filesystem::path& path) {
    std::vector<LabeledSpan> spans;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json record = json::parse(line);
        LabeledSpan span;
        // corpus text is already canonical tokens joined by spaces
        span.tokens = split_ws(record.at("text").get<std::string>());
        span.label = span_label_from_string(record.at("label").get<std::string>());
        span.source_id = record.value("source_id", "");
        if (record.contains("species") && record["species"].is_string())
            span.species = record["species"].get<std::string>();
        spans.push_back(std::move(span));
    }
    return spans;
}

}  // namespace florafill
