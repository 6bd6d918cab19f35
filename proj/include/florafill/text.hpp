#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace florafill {

// Placeholder every numeric token is mapped to.
inline constexpr const char* kNumberToken = "<num>";

struct SentencizerOptions {
    // Words that end with '.' without ending the sentence. Compared after
    // case-folding, stored without the dot.
    std::vector<std::string> abbreviations = {"var", "subsp", "cf", "ca", "syn", "mm", "cm"};
};

// Rule-based splitter: break after `.`, `?`, `!`, `;` when followed by
// whitespace and an uppercase letter or digit. Decimal points and ranges
// ("0.5-2") never match because no whitespace follows the dot. Terminators
// stay with their sentence; concatenating the output (modulo collapsed
// whitespace) reproduces the input.
std::vector<std::string> split_sentences(std::string_view text,
                                         const SentencizerOptions& options = {});

// Lowercased word tokens; digit runs (with interior '.'/',' between digits)
// become kNumberToken. "6-36 m tall" -> ["<num>", "<num>", "m", "tall"].
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace florafill
