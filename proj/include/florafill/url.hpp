#pragma once

#include <string>
#include <string_view>

namespace florafill {

struct ParsedUrl {
    std::string scheme;
    std::string host;  // lowercased
    std::string port;  // empty when default
    std::string path;  // includes query, defaults to "/"

    std::string origin() const {  // scheme://host[:port]
        std::string out = scheme + "://" + host;
        if (!port.empty()) out += ":" + port;
        return out;
    }
};

// Minimal absolute-URL parser for http(s) and the test-only mock scheme.
// Throws Error on anything else.
ParsedUrl parse_url(std::string_view url);

std::string url_encode(std::string_view value);

}  // namespace florafill
