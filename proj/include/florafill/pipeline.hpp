#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "florafill/detector.hpp"
#include "florafill/extractor.hpp"
#include "florafill/weak_label.hpp"

namespace florafill {

// One configuration file drives every command. All paths are resolved
// relative to the config file's directory; every field except species_file
// and schema_file has a default.
struct PipelineConfig {
    std::filesystem::path species_file;
    std::filesystem::path schema_file;
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 42;
    bool offline = false;

    struct Harvest {
        int url_limit = 20;
        int parallelism = 4;
        double per_domain_delay_s = 1.0;
        std::string user_agent = "florafill/0.1 (+trait harvesting; contact via repository)";
        std::filesystem::path mock_corpus_dir;  // required in offline mode
    } harvest;

    struct Corpus {
        std::filesystem::path weak_docs_file;
        std::filesystem::path random_docs_file;   // optional negative augmentation
        std::filesystem::path header_rules_file;  // defaults ship in-code
        std::vector<std::string> train_sources = {"wikipedia", "powo"};
        double validation_fraction = 0.15;
    } corpus;

    struct Detector {
        std::filesystem::path model_file;  // default: <output_dir>/detector.model
        double threshold = 0.5;
        std::size_t embedding_dim = kDefaultEmbeddingDim;
        std::uint64_t hash_seed = kDefaultHashSeed;
        TrainConfig train;
    } detector;

    struct Extractor {
        LlmClientConfig llm;
        ExtractionMode mode = ExtractionMode::all_traits;
        int parallelism = 2;
    } extractor;

    struct Eval {
        std::filesystem::path reference_matrix_file;
        bool render_svg = true;
    } eval;

    struct FnStudy {
        std::filesystem::path input_file;
    } fn_study;

    static PipelineConfig load(const std::filesystem::path& config_path);

    std::filesystem::path model_file_or_default() const;
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    bool offline = false;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::filesystem::path> cache_dir;
};

PipelineConfig load_config(const std::filesystem::path& config_path, const CliOverrides& overrides);

// Commands; each throws florafill::Error subclasses on failure.
void cmd_harvest(const PipelineConfig& cfg);
void cmd_build_corpus(const PipelineConfig& cfg);
void cmd_train_detector(const PipelineConfig& cfg);
void cmd_detect(const PipelineConfig& cfg);
void cmd_extract(const PipelineConfig& cfg);
void cmd_evaluate(const PipelineConfig& cfg);
void cmd_fn_study(const PipelineConfig& cfg);

// Full offline run on the bundled fixture corpus; compares outputs against
// the committed golden files. Returns false on any mismatch.
bool cmd_demo(const std::filesystem::path& data_dir, const std::filesystem::path& output_dir,
              const std::filesystem::path& cache_dir);

}  // namespace florafill
