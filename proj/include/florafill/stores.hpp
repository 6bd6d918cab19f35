#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "florafill/types.hpp"

namespace florafill {

// JSONL stores used between pipeline stages.

void save_raw_sentences(const std::filesystem::path& path, const std::vector<RawSentence>& sentences);
std::vector<RawSentence> load_raw_sentences(const std::filesystem::path& path);

void save_scored_sentences(const std::filesystem::path& path,
                           const std::vector<ScoredSentence>& sentences);
std::vector<ScoredSentence> load_scored_sentences(const std::filesystem::path& path);

// One binomial per line; blank lines and '#' comments skipped.
std::vector<std::string> load_species_list(const std::filesystem::path& path);

}  // namespace florafill
