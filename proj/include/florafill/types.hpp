#pragma once

#include <cstdint>
#include <string>

#include "florafill/common.hpp"

namespace florafill {

// Where a fetched body came from. content_hash is the 64-bit FNV-1a of the
// raw body, so identical bodies always map to the same digest.
struct Provenance {
    std::string url;
    std::int64_t fetch_unix = 0;  // UTC seconds
    std::uint64_t content_hash = 0;
};

// One sentence with provenance and its descriptiveness score.
struct ScoredSentence {
    std::string species;  // binomial
    std::string url;
    std::string sentence;
    double score = 0.0;
};

// Raw harvested sentence, before scoring.
struct RawSentence {
    std::string species;
    std::string url;
    std::string sentence;
    std::int64_t fetch_unix = 0;
    std::uint64_t content_hash = 0;
};

}  // namespace florafill
