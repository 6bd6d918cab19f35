#pragma once

#include <string>
#include <string_view>

namespace florafill {

struct ExtractedText {
    std::string body;    // visible text, block elements separated by newlines
    std::string header;  // title plus h1-h3 headings, newline separated
};

// Tag-level extraction: script/style/nav/footer/noscript subtrees and the
// document head are dropped from the body; entities are decoded; whitespace
// is collapsed per line.
ExtractedText extract_html_text(std::string_view html);

std::string decode_entities(std::string_view text);

}  // namespace florafill
