#include "florafill/html_text.hpp"

#include <array>
#include <cctype>
#include <cstdint>

#include "florafill/common.hpp"

namespace florafill {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

const std::array<std::pair<std::string_view, std::string_view>, 7> kNamedEntities = {{
    {"amp", "&"},
    {"lt", "<"},
    {"gt", ">"},
    {"quot", "\""},
    {"apos", "'"},
    {"nbsp", " "},
    {"ndash", "-"},
}};

bool is_suppressed_tag(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "nav" || tag == "footer" || tag == "noscript";
}

bool is_block_tag(std::string_view tag) {
    return tag == "p" || tag == "div" || tag == "br" || tag == "li" || tag == "ul" || tag == "ol" ||
           tag == "tr" || tag == "td" || tag == "th" || tag == "table" || tag == "section" ||
           tag == "article" || tag == "header" || tag == "main" || tag == "aside" ||
           tag == "blockquote" || tag == "h1" || tag == "h2" || tag == "h3" || tag == "h4" ||
           tag == "h5" || tag == "h6" || tag == "title" || tag == "dt" || tag == "dd";
}

struct TagToken {
    std::string name;  // lowercased, no slashes
    bool closing = false;
    std::size_t end = 0;  // index one past '>'
};

// parses the tag starting at '<'; returns false for comments/doctype/etc.
bool parse_tag(std::string_view html, std::size_t pos, TagToken& tag) {
    std::size_t i = pos + 1;
    if (i >= html.size()) return false;
    if (html[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t name_begin = i;
    while (i < html.size() &&
           (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-' || html[i] == ':'))
        ++i;
    if (i == name_begin) return false;
    tag.name = casefold(html.substr(name_begin, i - name_begin));
    // attributes: skip to '>', honoring quotes
    char quote = 0;
    while (i < html.size()) {
        char c = html[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            tag.end = i + 1;
            return true;
        }
        ++i;
    }
    return false;
}

}  // namespace

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out.push_back(text[i]);
            continue;
        }
        std::size_t semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        std::string_view body = text.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t k = 2; k < body.size() && ok; ++k) {
                    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(body[k])));
                    if (c >= '0' && c <= '9') cp = cp * 16 + static_cast<std::uint32_t>(c - '0');
                    else if (c >= 'a' && c <= 'f') cp = cp * 16 + static_cast<std::uint32_t>(c - 'a' + 10);
                    else ok = false;
                }
            } else {
                for (std::size_t k = 1; k < body.size() && ok; ++k) {
                    if (body[k] >= '0' && body[k] <= '9')
                        cp = cp * 10 + static_cast<std::uint32_t>(body[k] - '0');
                    else
                        ok = false;
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) {
                append_utf8(out, cp);
                i = semi;
                continue;
            }
            out.push_back('&');
            continue;
        }
        bool matched = false;
        for (const auto& [name, repl] : kNamedEntities) {
            if (body == name) {
                out += repl;
                i = semi;
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back('&');
    }
    return out;
}

ExtractedText extract_html_text(std::string_view html) {
    std::string body_raw;
    std::string header_raw;
    int suppress_depth = 0;
    int head_depth = 0;
    int title_depth = 0;
    int heading_depth = 0;  // h1-h3

    auto heading_level = [](std::string_view tag) -> int {
        if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '3') return 1;
        return 0;
    };

    for (std::size_t i = 0; i < html.size();) {
        if (html[i] == '<') {
            if (starts_with(html.substr(i), "<!--")) {
                std::size_t close = html.find("-->", i + 4);
                i = close == std::string_view::npos ? html.size() : close + 3;
                continue;
            }
            if (starts_with(html.substr(i), "<!") || starts_with(html.substr(i), "<?")) {
                std::size_t close = html.find('>', i + 1);
                i = close == std::string_view::npos ? html.size() : close + 1;
                continue;
            }
            TagToken tag;
            if (!parse_tag(html, i, tag)) {
                ++i;
                body_raw.push_back('<');
                continue;
            }
            // raw-text elements keep '<' in their content; skip straight to
            // the closing tag
            if (!tag.closing && (tag.name == "script" || tag.name == "style")) {
                std::string close = "</" + tag.name;
                std::size_t at = tag.end;
                std::size_t found = std::string_view::npos;
                while (at < html.size()) {
                    std::size_t cand = html.find('<', at);
                    if (cand == std::string_view::npos) break;
                    if (casefold(html.substr(cand, close.size())) == close) {
                        found = cand;
                        break;
                    }
                    at = cand + 1;
                }
                if (found == std::string_view::npos) {
                    i = html.size();
                } else {
                    std::size_t gt = html.find('>', found);
                    i = gt == std::string_view::npos ? html.size() : gt + 1;
                }
                continue;
            }
            int delta = tag.closing ? -1 : 1;
            if (is_suppressed_tag(tag.name)) suppress_depth = std::max(0, suppress_depth + delta);
            if (tag.name == "head") head_depth = std::max(0, head_depth + delta);
            if (tag.name == "title") title_depth = std::max(0, title_depth + delta);
            if (heading_level(tag.name)) heading_depth = std::max(0, heading_depth + delta);
            if (is_block_tag(tag.name)) {
                body_raw.push_back('\n');
                header_raw.push_back('\n');
            }
            i = tag.end;
            continue;
        }
        std::size_t next = html.find('<', i);
        if (next == std::string_view::npos) next = html.size();
        std::string_view chunk = html.substr(i, next - i);
        if (suppress_depth == 0) {
            std::string decoded = decode_entities(chunk);
            if (title_depth > 0 || heading_depth > 0) header_raw += decoded;
            if (head_depth == 0 && title_depth == 0) body_raw += decoded;
        }
        i = next;
    }

    auto normalize_lines = [](const std::string& raw) {
        std::string out;
        for (const std::string& line : split_lines(raw)) {
            std::string collapsed = collapse_whitespace(line);
            if (collapsed.empty()) continue;
            if (!out.empty()) out.push_back('\n');
            out += collapsed;
        }
        return out;
    };

    ExtractedText result;
    result.body = normalize_lines(body_raw);
    result.header = normalize_lines(header_raw);
    return result;
}

}  // namespace florafill
