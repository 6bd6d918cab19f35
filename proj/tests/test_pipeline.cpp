#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>

#include "florafill/pipeline.hpp"
#include "florafill/stores.hpp"

using namespace florafill;
namespace fs = std::filesystem;

namespace {

fs::path source_dir() { return TEST_SOURCE_DIR; }

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
    return files;
}

}  // namespace

TEST_CASE("config loads with defaults and resolves relative paths") {
    fs::path dir = fresh_dir("florafill_config_test");
    write_file(dir / "config.json", R"({
        "species_file": "species.txt",
        "schema_file": "schema.json",
        "extractor": {"endpoint_url": "mock"}
    })");
    PipelineConfig cfg = PipelineConfig::load(dir / "config.json");
    CHECK(cfg.species_file == dir / "species.txt");
    CHECK(cfg.schema_file == dir / "schema.json");
    CHECK(cfg.cache_dir == dir / "cache");
    CHECK(cfg.output_dir == dir / "out");
    CHECK(cfg.seed == 42);
    CHECK(cfg.harvest.url_limit == 20);
    CHECK(cfg.detector.threshold == 0.5);
    CHECK(cfg.detector.train.beta == doctest::Approx(0.20));
    CHECK(cfg.detector.train.epochs == 35);
    CHECK(cfg.detector.train.clip_norm == 1.0);
    CHECK(cfg.detector.train.batch_size == 32);
    CHECK(cfg.extractor.llm.context_limit == 32768);
    CHECK(cfg.extractor.llm.temperature == 0.0);
    CHECK(cfg.extractor.mode == ExtractionMode::all_traits);

    CliOverrides overrides;
    overrides.seed = 7;
    overrides.offline = true;
    PipelineConfig cfg2 = load_config(dir / "config.json", overrides);
    CHECK(cfg2.seed == 7);
    CHECK(cfg2.offline);
    CHECK(cfg2.extractor.llm.endpoint_url == "mock");
    fs::remove_all(dir);
}

TEST_CASE("offline pipeline end to end on the bundled demo data, idempotently") {
    fs::path out = fresh_dir("florafill_pipe_out");
    fs::path cache = fresh_dir("florafill_pipe_cache");

    CliOverrides overrides;
    overrides.offline = true;
    overrides.output_dir = out;
    overrides.cache_dir = cache;
    PipelineConfig cfg = load_config(source_dir() / "data" / "demo" / "config.json", overrides);
    cfg.detector.train.epochs = 3;  // keep the unit test quick

    cmd_harvest(cfg);
    auto sentences = load_raw_sentences(out / "sentences.jsonl");
    CHECK(sentences.size() > 10);
    // provenance recorded; offtopic pages never contribute
    for (const RawSentence& s : sentences) {
        CHECK(s.url.find("mock://") == 0);
        CHECK(s.url.find("offtopic") == std::string::npos);
    }

    cmd_build_corpus(cfg);
    CHECK(fs::exists(out / "corpus_train.jsonl"));
    CHECK(fs::exists(out / "corpus_val.jsonl"));
    CHECK(fs::exists(out / "corpus_test.jsonl"));
    CHECK(fs::exists(out / "corpus_counts.json"));

    cmd_train_detector(cfg);
    CHECK(fs::exists(out / "detector.model"));
    CHECK(fs::exists(out / "detector_metrics.csv"));

    cmd_detect(cfg);
    auto kept = load_scored_sentences(out / "descriptive_sentences.jsonl");
    CHECK(!kept.empty());
    for (const ScoredSentence& s : kept) CHECK(s.score >= 0.5);

    cmd_extract(cfg);
    CHECK(fs::exists(out / "matrix.csv"));
    CHECK(fs::exists(out / "extract_audit.jsonl"));

    cmd_evaluate(cfg);
    CHECK(fs::exists(out / "eval_report.json"));
    CHECK(fs::exists(out / "eval_report.txt"));
    CHECK(fs::exists(out / "per_trait.csv"));
    CHECK(fs::exists(out / "cooccurrence"));

    cmd_fn_study(cfg);
    CHECK(fs::exists(out / "fn_confusion.json"));

    // no writes outside output_dir and cache_dir: the demo data dir is pristine
    // (tested implicitly: outputs land under `out`, llm cache under `cache`)
    CHECK(fs::exists(cache / "llm"));

    // idempotency: once the cache is warm, re-running changes no output bytes
    // (the first run fills the cache, so the audit's cache_hit flags settle
    // after it)
    auto run_all = [&] {
        cmd_harvest(cfg);
        cmd_build_corpus(cfg);
        cmd_train_detector(cfg);
        cmd_detect(cfg);
        cmd_extract(cfg);
        cmd_evaluate(cfg);
        cmd_fn_study(cfg);
    };
    run_all();
    auto before = snapshot(out);
    run_all();
    auto after = snapshot(out);
    REQUIRE(before.size() == after.size());
    for (const auto& [name, content] : before) {
        INFO("file changed between runs: " << name);
        CHECK(after.at(name) == content);
    }

    fs::remove_all(out);
    fs::remove_all(cache);
}

TEST_CASE("seed changes flow into every stage") {
    fs::path out_a = fresh_dir("florafill_seed_a");
    fs::path out_b = fresh_dir("florafill_seed_b");
    fs::path cache_a = fresh_dir("florafill_seed_cache_a");
    fs::path cache_b = fresh_dir("florafill_seed_cache_b");

    auto run = [&](fs::path out, fs::path cache, std::uint64_t seed) {
        CliOverrides overrides;
        overrides.offline = true;
        overrides.seed = seed;
        overrides.output_dir = out;
        overrides.cache_dir = cache;
        PipelineConfig cfg = load_config(source_dir() / "data" / "demo" / "config.json", overrides);
        cfg.detector.train.epochs = 2;
        cmd_build_corpus(cfg);
        cmd_train_detector(cfg);
        return read_file(out / "detector.model");
    };
    std::string model_a = run(out_a, cache_a, 1);
    std::string model_b = run(out_b, cache_b, 2);
    std::string model_a2 = run(fresh_dir("florafill_seed_a2"), fresh_dir("florafill_seed_cache_a2"), 1);
    CHECK(model_a != model_b);
    CHECK(model_a == model_a2);

    for (const auto& d : {out_a, out_b, cache_a, cache_b}) fs::remove_all(d);
    fs::remove_all(fs::temp_directory_path() / "florafill_seed_a2");
    fs::remove_all(fs::temp_directory_path() / "florafill_seed_cache_a2");
}

TEST_CASE("cli: failed extract exits nonzero naming the endpoint") {
    fs::path dir = fresh_dir("florafill_cli_fail");
    write_file(dir / "species.txt", "Hedera helix\n");
    write_file(dir / "schema.json", R"({"Plant type": ["Tree", "Liana"]})");
    write_file(dir / "config.json", R"({
        "species_file": "species.txt",
        "schema_file": "schema.json",
        "cache_dir": "cache",
        "output_dir": "out",
        "extractor": {"endpoint_url": "http://127.0.0.1:9/v1/chat", "max_retries": 0, "timeout_s": 2}
    })");
    write_file(dir / "out" / "descriptive_sentences.jsonl",
               R"({"species": "Hedera helix", "url": "u", "sentence": "A climbing Liana.", "score": 0.9})"
               "\n");

    fs::path binary = fs::path(TEST_BINARY_DIR) / "tools" / "florafill";
    fs::path log = dir / "stderr.txt";
    std::string command = "\"" + binary.string() + "\" extract --config \"" +
                          (dir / "config.json").string() + "\" 2> \"" + log.string() + "\"";
    int status = std::system(command.c_str());
    CHECK(status != 0);
    std::string message = read_file(log);
    CHECK(message.find("LlmTransportError") != std::string::npos);
    CHECK(message.find("127.0.0.1:9") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: demo subcommand runs the golden pipeline") {
    fs::path out = fresh_dir("florafill_cli_demo_out");
    fs::path cache = fresh_dir("florafill_cli_demo_cache");
    fs::path binary = fs::path(TEST_BINARY_DIR) / "tools" / "florafill";
    fs::path data = source_dir() / "data" / "demo";
    fs::path log = out / "stdout.txt";
    std::string command = "\"" + binary.string() + "\" demo --data-dir \"" + data.string() +
                          "\" --output-dir \"" + out.string() + "\" --cache-dir \"" +
                          cache.string() + "\" > \"" + log.string() + "\" 2>/dev/null";
    int status = std::system(command.c_str());
    CHECK(status == 0);
    std::string output = read_file(log);
    CHECK(output.find("demo: PASS") != std::string::npos);
    CHECK(output.find("matrix.csv matches golden") != std::string::npos);
    fs::remove_all(out);
    fs::remove_all(cache);
}
