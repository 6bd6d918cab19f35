#include <doctest.h>

#include <filesystem>

#include "florafill/common.hpp"
#include "florafill/weak_label.hpp"

using namespace florafill;

namespace {

SectionedDocument wiki_doc() {
    SectionedDocument doc;
    doc.source_id = "wikipedia";
    doc.species = "Hedera helix";
    doc.sections = {
        {"Description", "The leaves are alternate and lobed with green veins above them."},
        {"Introduction", "Hedera helix was described long ago by many famous researchers."},
        {"Habitat", "It ranges across most of Europe and western Asia in shaded places."},
        {"References", "Smith 1900. Jones 1950."},
    };
    return doc;
}

std::string long_text(std::size_t words) {
    std::string text;
    for (std::size_t i = 0; i < words; ++i) text += "word" + std::to_string(i % 91) + " ";
    return text;
}

}  // namespace

TEST_CASE("label_sections applies the first matching rule, case-insensitively") {
    HeaderRules rules = HeaderRules::defaults();
    auto labeled = label_sections(wiki_doc(), rules);
    REQUIRE(labeled.size() == 3);  // References dropped
    CHECK(labeled[0].second == SpanLabel::descriptive);
    CHECK(labeled[1].second == SpanLabel::non_descriptive);
    CHECK(labeled[2].second == SpanLabel::non_descriptive);
}

TEST_CASE("label_sections with empty rules throws") {
    CHECK_THROWS_AS(label_sections(wiki_doc(), HeaderRules{}), Error);
}

TEST_CASE("header rules file round-trip and precedence") {
    HeaderRules rules = HeaderRules::from_json(
        R"({"descrip": "descriptive", "scrip": "non_descriptive"})");
    SectionedDocument doc;
    doc.source_id = "powo";
    doc.sections = {{"DESCRIPTION", "body text"}};
    auto labeled = label_sections(doc, rules);
    REQUIRE(labeled.size() == 1);
    CHECK(labeled[0].second == SpanLabel::descriptive);  // first pattern wins
}

TEST_CASE("make_spans partitions the token stream exactly") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
        for (std::size_t words : {10UL, 11UL, 250UL, 600UL, 1200UL, 5000UL}) {
            std::string text = long_text(words);
            auto spans = make_spans(text, SpanLabel::descriptive, seed, "wikipedia");
            std::size_t total = 0;
            for (const LabeledSpan& span : spans) {
                total += span.tokens.size();
                CHECK(span.tokens.size() >= kMinSpanTokens);
                CHECK(span.tokens.size() <= kMaxSpanTokens);
                CHECK(span.label == SpanLabel::descriptive);
            }
            CHECK(total == tokenize(text).size());
            // flattened tokens reproduce the stream in order
            std::vector<std::string> flat;
            for (const LabeledSpan& span : spans)
                flat.insert(flat.end(), span.tokens.begin(), span.tokens.end());
            CHECK(flat == tokenize(text));
        }
    }
}

TEST_CASE("make_spans is deterministic per seed") {
    std::string text = long_text(2000);
    auto a = make_spans(text, SpanLabel::non_descriptive, 42, "powo");
    auto b = make_spans(text, SpanLabel::non_descriptive, 42, "powo");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tokens == b[i].tokens);
    auto c = make_spans(text, SpanLabel::non_descriptive, 43, "powo");
    bool identical = a.size() == c.size();
    if (identical)
        for (std::size_t i = 0; i < a.size(); ++i)
            identical = identical && a[i].tokens == c[i].tokens;
    CHECK_FALSE(identical);
}

TEST_CASE("make_spans drops sub-minimum text") {
    CHECK(make_spans("only four tokens here", SpanLabel::descriptive, 1).empty());
}

TEST_CASE("augment_negatives labels every section non-descriptive") {
    SectionedDocument random_page;
    random_page.source_id = "wikipedia_random";
    random_page.sections = {{"History", "Metropolitan France was settled during the Iron Age."},
                            {"Economy", "The area exports goods."}};
    auto labeled = augment_negatives({random_page});
    REQUIRE(labeled.size() == 2);
    for (const auto& [text, label] : labeled) CHECK(label == SpanLabel::non_descriptive);
}

TEST_CASE("build_corpus splits by source family and reports counts") {
    std::vector<SectionedDocument> docs;
    for (int i = 0; i < 30; ++i) {
        SectionedDocument doc;
        doc.source_id = i % 2 == 0 ? "wikipedia" : "llifle";
        doc.species = "Species s" + std::to_string(i);
        doc.sections = {{"Description", long_text(40)}, {"Habitat", long_text(40)}};
        docs.push_back(std::move(doc));
    }
    CorpusOptions options;
    options.seed = 7;
    Corpus corpus = build_corpus(docs, {}, HeaderRules::defaults(), options);

    CHECK(corpus.counts.descriptive > 0);
    CHECK(corpus.counts.non_descriptive > 0);
    CHECK(corpus.counts.total() ==
          corpus.train.size() + corpus.validation.size() + corpus.test.size());
    // llifle is held out
    for (const LabeledSpan& span : corpus.train) CHECK(span.source_id == "wikipedia");
    for (const LabeledSpan& span : corpus.validation) CHECK(span.source_id == "wikipedia");
    for (const LabeledSpan& span : corpus.test) CHECK(span.source_id == "llifle");
    CHECK(corpus.test.size() > 0);

    // deterministic given the seed
    Corpus again = build_corpus(docs, {}, HeaderRules::defaults(), options);
    CHECK(again.train.size() == corpus.train.size());
    CHECK(again.validation.size() == corpus.validation.size());
}

TEST_CASE("span store round-trips") {
    std::vector<SectionedDocument> docs{wiki_doc()};
    SectionedDocument big;
    big.source_id = "wikipedia";
    big.sections = {{"Description", long_text(200)}};
    docs.push_back(big);
    Corpus corpus = build_corpus(docs, {}, HeaderRules::defaults(), {});

    std::filesystem::path tmp = std::filesystem::temp_directory_path() / "florafill_spans_test.jsonl";
    std::vector<LabeledSpan> all = corpus.train;
    all.insert(all.end(), corpus.validation.begin(), corpus.validation.end());
    save_spans(tmp, all);
    auto loaded = load_spans(tmp);
    REQUIRE(loaded.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(loaded[i].tokens == all[i].tokens);
        CHECK(loaded[i].label == all[i].label);
        CHECK(loaded[i].source_id == all[i].source_id);
    }
    std::filesystem::remove(tmp);
}
