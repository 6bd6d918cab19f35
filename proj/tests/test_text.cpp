#include <doctest.h>

#include "florafill/common.hpp"
#include "florafill/text.hpp"

using namespace florafill;

TEST_CASE("splitter separates the example pair") {
    auto s = split_sentences(
        "The leaves are alternate. The fruit are purple-black to orange-yellow berries.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "The leaves are alternate.");
    CHECK(s[1] == "The fruit are purple-black to orange-yellow berries.");
}

TEST_CASE("splitter on empty input") {
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   \n\t ").empty());
}

TEST_CASE("no split inside decimals and ranges") {
    auto s = split_sentences("Pedicels 0.5-2 mm long, minute bracteoles.");
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "Pedicels 0.5-2 mm long, minute bracteoles.");
}

TEST_CASE("abbreviation guard holds sentences together") {
    auto s = split_sentences("Albizia coriaria var. Albida is common. It grows tall.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "Albizia coriaria var. Albida is common.");
}

TEST_CASE("question marks, semicolons and digits break sentences") {
    auto s = split_sentences("Is it a tree? 4 species agree; Two more follow.");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "Is it a tree?");
    CHECK(s[1] == "4 species agree;");
    CHECK(s[2] == "Two more follow.");
}

TEST_CASE("lowercase continuation does not break") {
    auto s = split_sentences("See fig. 3 for details. the same plant.");
    // ". the" must not split; ". 3" does (digit follows)
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "See fig.");
    CHECK(s[1] == "3 for details. the same plant.");
}

TEST_CASE("terminators stay with their sentence and nothing is lost") {
    Rng rng(77);
    std::vector<std::string> words{"Leaves", "are",    "green.", "Fruit?",  "Tall!",
                                   "stems;", "0.5-2",  "mm",     "ca.",     "var.",
                                   "The",    "plant.", "A",      "berry.",  "99"};
    for (int iter = 0; iter < 200; ++iter) {
        std::string text;
        std::size_t n = 1 + rng.next_below(30);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) text += rng.next_double() < 0.1 ? "  " : " ";
            text += words[rng.next_below(words.size())];
        }
        auto sentences = split_sentences(text);
        std::string joined;
        for (const auto& s : sentences) {
            if (!joined.empty()) joined += " ";
            joined += s;
        }
        CHECK(collapse_whitespace(joined) == collapse_whitespace(text));
    }
}

TEST_CASE("tokenizer worked examples") {
    CHECK(tokenize("Leaves are alternate") == std::vector<std::string>{"leaves", "are", "alternate"});
    CHECK(tokenize("6-36 m tall") == std::vector<std::string>{"<num>", "<num>", "m", "tall"});
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenizer handles decimals, commas and punctuation") {
    CHECK(tokenize("0.5-2 mm") == std::vector<std::string>{"<num>", "<num>", "mm"});
    CHECK(tokenize("1,200 stems") == std::vector<std::string>{"<num>", "stems"});
    CHECK(tokenize("Don't split-words badly") ==
          std::vector<std::string>{"don", "t", "split", "words", "badly"});
    CHECK(tokenize("<num>") == std::vector<std::string>{"num"});
}

TEST_CASE("tokenizer is deterministic and lowercases") {
    CHECK(tokenize("LEAVES Are ALTERNATE") == tokenize("leaves are alternate"));
}
