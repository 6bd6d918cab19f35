#include "florafill/text.hpp"

#include <cctype>

#include "florafill/common.hpp"

namespace florafill {

namespace {

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!' || c == ';'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_abbreviation_dot(std::string_view text, std::size_t dot, const SentencizerOptions& options) {
    std::size_t end = dot;
    std::size_t begin = end;
    while (begin > 0 && std::isalpha(static_cast<unsigned char>(text[begin - 1]))) --begin;
    if (begin == end) return false;
    std::string word = casefold(text.substr(begin, end - begin));
    for (const std::string& abbr : options.abbreviations)
        if (word == abbr) return true;
    return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text, const SentencizerOptions& options) {
    std::vector<std::string> sentences;
    std::size_t start = 0;

    auto emit = [&](std::size_t end) {
        std::string sentence = trim(text.substr(start, end - start));
        if (!sentence.empty()) sentences.push_back(std::move(sentence));
        start = end;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminator(text[i])) continue;
        if (text[i] == '.' && is_abbreviation_dot(text, i, options)) continue;

        // Absorb terminator runs ("..." / "?!") and trailing closers.
        std::size_t end = i + 1;
        while (end < text.size() && is_terminator(text[end])) ++end;
        while (end < text.size() && is_closer(text[end])) ++end;

        // Break only before whitespace followed by an uppercase letter or digit.
        std::size_t next = end;
        while (next < text.size() && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
        if (next == end) {
            i = end - 1;
            continue;
        }
        if (next < text.size() && (std::isupper(static_cast<unsigned char>(text[next])) ||
                                   std::isdigit(static_cast<unsigned char>(text[next])))) {
            emit(end);
        }
        i = end - 1;
    }
    emit(text.size());
    return sentences;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalpha(c)) {
            std::size_t b = i;
            while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
            tokens.push_back(casefold(text.substr(b, i - b)));
        } else if (std::isdigit(c)) {
            // digits, allowing '.'/',' between digits ("0.5", "1,200")
            ++i;
            while (i < text.size()) {
                unsigned char d = static_cast<unsigned char>(text[i]);
                if (std::isdigit(d)) {
                    ++i;
                } else if ((d == '.' || d == ',') && i + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                    i += 2;
                } else {
                    break;
                }
            }
            tokens.emplace_back(kNumberToken);
        } else {
            ++i;
        }
    }
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace florafill
