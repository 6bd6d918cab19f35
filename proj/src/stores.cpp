#include "florafill/stores.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "florafill/common.hpp"

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;
using nlohmann::json;
}

void save_raw_sentences(const std::filesystem::path& path, const std::vector<RawSentence>& sentences) {
    std::ostringstream out;
    for (const RawSentence& s : sentences) {
        ordered_json record;
        record["species"] = s.species;
        record["url"] = s.url;
        record["sentence"] = s.sentence;
        record["fetch_timestamp"] = format_utc(s.fetch_unix);
        record["content_hash"] = hex64(s.content_hash);
        out << record.dump() << "\n";
    }
    write_file(path, out.str());
}

std::vector<RawSentence> load_raw_sentences(const std::filesystem::path& path) {
    std::vector<RawSentence> out;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json record = json::parse(line);
        RawSentence s;
        s.species = record.at("species").get<std::string>();
        s.url = record.at("url").get<std::string>();
        s.sentence = record.at("sentence").get<std::string>();
        s.content_hash = std::stoull(record.value("content_hash", "0"), nullptr, 16);
        // timestamps round-trip through the index, not this store
        out.push_back(std::move(s));
    }
    return out;
}

void save_scored_sentences(const std::filesystem::path& path,
                           const std::vector<ScoredSentence>& sentences) {
    std::ostringstream out;
    for (const ScoredSentence& s : sentences) {
        ordered_json record;
        record["species"] = s.species;
        record["url"] = s.url;
        record["sentence"] = s.sentence;
        record["score"] = s.score;
        out << record.dump() << "\n";
    }
    write_file(path, out.str());
}

std::vector<ScoredSentence> load_scored_sentences(const std::filesystem::path& path) {
    std::vector<ScoredSentence> out;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        json record = json::parse(line);
        ScoredSentence s;
        s.species = record.at("species").get<std::string>();
        s.url = record.at("url").get<std::string>();
        s.sentence = record.at("sentence").get<std::string>();
        s.score = record.at("score").get<double>();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> load_species_list(const std::filesystem::path& path) {
    std::vector<std::string> out;
    for (const std::string& line : split_lines(read_file(path))) {
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        out.push_back(trimmed);
    }
    return out;
}

}  // namespace florafill
