#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace florafill::csv {

// Minimal RFC 4180 reader/writer: quoted fields, embedded commas, quotes and
// newlines. Rows are vectors of fields; the writer quotes only when needed.

std::string escape_field(std::string_view field);
std::string write_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace florafill::csv
