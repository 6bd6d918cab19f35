#include "florafill/pipeline.hpp"

#include <atomic>
#include <cctype>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "florafill/evaluation.hpp"
#include "florafill/harvester.hpp"
#include "florafill/stores.hpp"

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

// Structured event log, one JSON object per line. Events carry sequence
// numbers instead of wall-clock timestamps so re-runs are byte-identical.
class EventLog {
public:
    EventLog(const std::filesystem::path& output_dir, const std::string& command)
        : path_(output_dir / "logs" / (command + ".events.jsonl")) {}

    void emit(const std::string& event, ordered_json fields = ordered_json::object()) {
        ordered_json record;
        record["seq"] = seq_++;
        record["event"] = event;
        for (auto& [k, v] : fields.items()) record[k] = v;
        buffer_ << record.dump() << "\n";
    }

    ~EventLog() {
        try {
            write_file(path_, buffer_.str());
        } catch (...) {
        }
    }

private:
    std::filesystem::path path_;
    std::ostringstream buffer_;
    std::size_t seq_ = 0;
};

std::string sanitize_filename(std::string_view name) {
    std::string out;
    for (char c : casefold(name)) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
        else if (!out.empty() && out.back() != '_') out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "trait" : out;
}

HeaderRules load_rules(const PipelineConfig& cfg) {
    if (!cfg.corpus.header_rules_file.empty()) return HeaderRules::load(cfg.corpus.header_rules_file);
    return HeaderRules::defaults();
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& config_path) {
    json doc = json::parse(read_file(config_path));
    std::filesystem::path base = config_path.has_parent_path() ? config_path.parent_path()
                                                               : std::filesystem::path(".");
    PipelineConfig cfg;
    auto path_of = [&](const json& node, const char* key,
                       const std::filesystem::path& fallback) -> std::filesystem::path {
        if (!node.contains(key)) return fallback;
        return resolve(base, node.at(key).get<std::string>());
    };

    cfg.species_file = path_of(doc, "species_file", {});
    cfg.schema_file = path_of(doc, "schema_file", {});
    cfg.cache_dir = path_of(doc, "cache_dir", resolve(base, "cache"));
    cfg.output_dir = path_of(doc, "output_dir", resolve(base, "out"));
    cfg.seed = doc.value("seed", std::uint64_t{42});
    cfg.offline = doc.value("offline", false);

    if (doc.contains("harvest")) {
        const json& h = doc["harvest"];
        cfg.harvest.url_limit = h.value("url_limit", 20);
        cfg.harvest.parallelism = h.value("parallelism", 4);
        cfg.harvest.per_domain_delay_s = h.value("per_domain_delay_s", 1.0);
        cfg.harvest.user_agent = h.value("user_agent", cfg.harvest.user_agent);
        cfg.harvest.mock_corpus_dir = path_of(h, "mock_corpus_dir", {});
    }
    if (doc.contains("corpus")) {
        const json& c = doc["corpus"];
        cfg.corpus.weak_docs_file = path_of(c, "weak_docs_file", {});
        cfg.corpus.random_docs_file = path_of(c, "random_docs_file", {});
        cfg.corpus.header_rules_file = path_of(c, "header_rules_file", {});
        if (c.contains("train_sources"))
            cfg.corpus.train_sources = c["train_sources"].get<std::vector<std::string>>();
        cfg.corpus.validation_fraction = c.value("validation_fraction", 0.15);
    }
    if (doc.contains("detector")) {
        const json& d = doc["detector"];
        cfg.detector.model_file = path_of(d, "model_file", {});
        cfg.detector.threshold = d.value("threshold", 0.5);
        cfg.detector.embedding_dim = d.value("embedding_dim", kDefaultEmbeddingDim);
        cfg.detector.hash_seed = d.value("hash_seed", kDefaultHashSeed);
        if (d.contains("train")) {
            const json& t = d["train"];
            cfg.detector.train.beta = t.value("beta", 0.20);
            cfg.detector.train.learning_rate = t.value("learning_rate", 1e-2);
            cfg.detector.train.batch_size = t.value("batch_size", std::size_t{32});
            cfg.detector.train.clip_norm = t.value("clip_norm", 1.0);
            cfg.detector.train.epochs = t.value("epochs", std::size_t{35});
            cfg.detector.train.dropout_rate = t.value("dropout_rate", 0.1);
        }
    }
    if (doc.contains("extractor")) {
        const json& e = doc["extractor"];
        cfg.extractor.llm.endpoint_url = e.value("endpoint_url", "");
        cfg.extractor.llm.api_key_env = e.value("api_key_env", "LLM_API_KEY");
        cfg.extractor.llm.model_id = e.value("model_id", "mistral-medium");
        cfg.extractor.llm.temperature = e.value("temperature", 0.0);
        cfg.extractor.llm.max_retries = e.value("max_retries", 3);
        cfg.extractor.llm.timeout_s = e.value("timeout_s", 120.0);
        cfg.extractor.llm.context_limit = e.value("context_limit", std::size_t{32768});
        cfg.extractor.llm.output_reserve = e.value("output_reserve", std::size_t{2048});
        cfg.extractor.llm.requests_per_minute = e.value("requests_per_minute", 0.0);
        if (e.contains("mode")) cfg.extractor.mode = extraction_mode_from_string(e["mode"].get<std::string>());
        cfg.extractor.parallelism = e.value("parallelism", 2);
    }
    if (doc.contains("eval")) {
        cfg.eval.reference_matrix_file = path_of(doc["eval"], "reference_matrix_file", {});
        cfg.eval.render_svg = doc["eval"].value("render_svg", true);
    }
    if (doc.contains("fn_study")) cfg.fn_study.input_file = path_of(doc["fn_study"], "input_file", {});

    return cfg;
}

std::filesystem::path PipelineConfig::model_file_or_default() const {
    return detector.model_file.empty() ? output_dir / "detector.model" : detector.model_file;
}

PipelineConfig load_config(const std::filesystem::path& config_path, const CliOverrides& overrides) {
    PipelineConfig cfg = PipelineConfig::load(config_path);
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
        cfg.detector.train.seed = *overrides.seed;
    } else {
        cfg.detector.train.seed = cfg.seed;
    }
    if (overrides.offline) cfg.offline = true;
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.cache_dir) cfg.cache_dir = *overrides.cache_dir;
    if (cfg.offline) {
        cfg.extractor.llm.endpoint_url = "mock";
        cfg.extractor.llm.model_id = "mock";
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// harvest
// ---------------------------------------------------------------------------

void cmd_harvest(const PipelineConfig& cfg) {
    if (cfg.species_file.empty()) throw Error("config: species_file is required");
    EventLog events(cfg.output_dir, "harvest");

    std::vector<std::string> species = load_species_list(cfg.species_file);
    events.emit("species_loaded", {{"count", species.size()}});

    std::unique_ptr<SearchBackend> backend;
    if (cfg.offline) {
        if (cfg.harvest.mock_corpus_dir.empty())
            throw Error("offline harvest needs harvest.mock_corpus_dir");
        backend = std::make_unique<MockSearchBackend>(cfg.harvest.mock_corpus_dir);
    } else {
        backend = std::make_unique<HttpSearchBackend>(HttpSearchBackend::from_env(cfg.cache_dir));
    }

    FetcherOptions fopts;
    fopts.cache_dir = cfg.cache_dir;
    fopts.user_agent = cfg.harvest.user_agent;
    fopts.per_domain_delay_s = cfg.harvest.per_domain_delay_s;
    fopts.offline = cfg.offline;
    fopts.mock_root = cfg.harvest.mock_corpus_dir;
    Fetcher fetcher(fopts);

    HarvestOptions hopts;
    hopts.url_limit = cfg.harvest.url_limit;
    hopts.parallelism = cfg.harvest.parallelism;

    std::vector<RawSentence> store;
    for (const std::string& line : species) {
        std::string binomial = strip_authority(line);
        HarvestOutcome outcome = harvest_species(*backend, fetcher, binomial, hopts);
        std::size_t sentence_count = 0;
        for (const FetchedDocument& doc : outcome.documents) {
            for (const std::string& doc_line : split_lines(doc.body_text)) {
                for (const std::string& sentence : split_sentences(doc_line)) {
                    std::string clean = collapse_whitespace(sentence);
                    if (clean.empty()) continue;
                    RawSentence s;
                    s.species = line;  // verbatim from the input list
                    s.url = doc.provenance.url;
                    s.sentence = clean;
                    s.fetch_unix = doc.provenance.fetch_unix;
                    s.content_hash = doc.provenance.content_hash;
                    store.push_back(std::move(s));
                    ++sentence_count;
                }
            }
        }
        std::cerr << "harvest: " << line << ": " << outcome.hit_count << " hits, "
                  << outcome.documents.size() << " kept pages, " << sentence_count << " sentences\n";
        events.emit("species_harvested", {{"species", line},
                                          {"hits", outcome.hit_count},
                                          {"fetched", outcome.fetched},
                                          {"kept_documents", outcome.documents.size()},
                                          {"failed", outcome.failed},
                                          {"skipped", outcome.skipped},
                                          {"filtered_out", outcome.filtered_out},
                                          {"sentences", sentence_count}});
        for (const std::string& err : outcome.errors) events.emit("fetch_problem", {{"detail", err}});
    }

    save_raw_sentences(cfg.output_dir / "sentences.jsonl", store);
    events.emit("store_written", {{"sentences", store.size()}});
    std::cerr << "harvest: wrote " << store.size() << " sentences\n";
}

// ---------------------------------------------------------------------------
// build-corpus
// ---------------------------------------------------------------------------

void cmd_build_corpus(const PipelineConfig& cfg) {
    if (cfg.corpus.weak_docs_file.empty()) throw Error("config: corpus.weak_docs_file is required");
    EventLog events(cfg.output_dir, "build_corpus");

    std::vector<SectionedDocument> docs = load_sectioned_documents(cfg.corpus.weak_docs_file);
    std::vector<SectionedDocument> random_docs;
    if (!cfg.corpus.random_docs_file.empty())
        random_docs = load_sectioned_documents(cfg.corpus.random_docs_file);

    CorpusOptions options;
    options.train_sources = cfg.corpus.train_sources;
    options.validation_fraction = cfg.corpus.validation_fraction;
    options.seed = cfg.seed;
    Corpus corpus = build_corpus(docs, random_docs, load_rules(cfg), options);

    save_spans(cfg.output_dir / "corpus_train.jsonl", corpus.train);
    save_spans(cfg.output_dir / "corpus_val.jsonl", corpus.validation);
    save_spans(cfg.output_dir / "corpus_test.jsonl", corpus.test);

    ordered_json counts;
    counts["descriptive"] = corpus.counts.descriptive;
    counts["non_descriptive"] = corpus.counts.non_descriptive;
    counts["noise_ratio_non_descriptive_to_descriptive"] = corpus.counts.noise_ratio();
    counts["dropped_sections"] = corpus.counts.dropped_sections;
    counts["train_spans"] = corpus.train.size();
    counts["validation_spans"] = corpus.validation.size();
    counts["test_spans"] = corpus.test.size();
    write_file(cfg.output_dir / "corpus_counts.json", counts.dump(2) + "\n");

    std::cerr << "build-corpus: " << corpus.counts.descriptive << " descriptive / "
              << corpus.counts.non_descriptive << " non-descriptive spans (ratio "
              << corpus.counts.noise_ratio() << ")\n";
    events.emit("corpus_built", counts);
}

// ---------------------------------------------------------------------------
// train-detector
// ---------------------------------------------------------------------------

void cmd_train_detector(const PipelineConfig& cfg) {
    EventLog events(cfg.output_dir, "train_detector");

    std::vector<LabeledSpan> train_spans = load_spans(cfg.output_dir / "corpus_train.jsonl");
    std::vector<LabeledSpan> val_spans = load_spans(cfg.output_dir / "corpus_val.jsonl");
    std::vector<LabeledSpan> test_spans = load_spans(cfg.output_dir / "corpus_test.jsonl");

    HashedNgramProvider provider(cfg.detector.embedding_dim, cfg.detector.hash_seed);
    TrainConfig tc = cfg.detector.train;
    tc.seed = cfg.seed;

    auto progress = [&](const EpochLog& log) {
        std::cerr << "train-detector: epoch " << log.epoch << " loss " << log.train_loss;
        ordered_json fields{{"epoch", log.epoch}, {"train_loss", log.train_loss}};
        if (log.validation) {
            std::cerr << " val_f1 " << log.validation->descriptive.f1;
            fields["validation_f1_descriptive"] = log.validation->descriptive.f1;
        }
        std::cerr << "\n";
        events.emit("epoch", fields);
    };
    ClassifierHead head = train(train_spans, provider, tc, &val_spans, progress);

    DetectorModel model;
    model.head = std::move(head);
    model.threshold = cfg.detector.threshold;
    model.provider_kind = "hashed_ngram";
    model.embedding_dim = cfg.detector.embedding_dim;
    model.hash_seed = cfg.detector.hash_seed;
    model.save(cfg.model_file_or_default());

    std::vector<std::pair<std::string, DetectorEval>> splits;
    if (!val_spans.empty())
        splits.emplace_back("Val.", evaluate_detector(model.head, provider, val_spans));
    if (!test_spans.empty())
        splits.emplace_back("Test", evaluate_detector(model.head, provider, test_spans));
    std::string report = detector_report_csv(splits);
    write_file(cfg.output_dir / "detector_metrics.csv", report);
    std::cerr << report;
    for (const auto& [name, eval] : splits)
        events.emit("split_metrics", {{"split", name},
                                      {"descriptive_f1", eval.descriptive.f1},
                                      {"non_descriptive_f1", eval.non_descriptive.f1},
                                      {"descriptive_count", eval.descriptive.count},
                                      {"non_descriptive_count", eval.non_descriptive.count}});
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

void cmd_detect(const PipelineConfig& cfg) {
    EventLog events(cfg.output_dir, "detect");

    DetectorModel model = DetectorModel::load(cfg.model_file_or_default());
    std::unique_ptr<EmbeddingProvider> provider = model.make_provider();
    std::vector<RawSentence> raw = load_raw_sentences(cfg.output_dir / "sentences.jsonl");

    std::vector<SentenceInput> inputs;
    inputs.reserve(raw.size());
    for (const RawSentence& s : raw) inputs.push_back(SentenceInput{s.species, s.url, s.sentence});
    double threshold = cfg.detector.threshold;
    std::vector<ScoredSentence> kept = filter_descriptive(inputs, model.head, *provider, threshold);

    save_scored_sentences(cfg.output_dir / "descriptive_sentences.jsonl", kept);
    std::cerr << "detect: kept " << kept.size() << " of " << raw.size() << " sentences (threshold "
              << threshold << ")\n";
    events.emit("detected", {{"kept", kept.size()}, {"total", raw.size()}, {"threshold", threshold}});
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

namespace {
void run_extraction(const PipelineConfig& cfg, ExtractionMode mode,
                    const std::filesystem::path& matrix_path,
                    const std::filesystem::path& audit_path, EventLog& events) {
    TraitSchema schema = TraitSchema::load(cfg.schema_file);
    std::vector<std::string> species = load_species_list(cfg.species_file);
    std::vector<ScoredSentence> store =
        load_scored_sentences(cfg.output_dir / "descriptive_sentences.jsonl");

    LlmClient client(make_llm_backend(cfg.extractor.llm), cfg.extractor.llm, cfg.cache_dir);

    std::vector<std::vector<ScoredSentence>> per_species(species.size());
    for (const ScoredSentence& s : store) {
        for (std::size_t i = 0; i < species.size(); ++i) {
            if (canonical_key(species[i]) == canonical_key(s.species)) {
                per_species[i].push_back(s);
                break;
            }
        }
    }

    std::vector<SpeciesExtraction> extractions(species.size());
    int workers = std::max(1, std::min<int>(cfg.extractor.parallelism,
                                            static_cast<int>(species.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= species.size()) return;
            try {
                extractions[i] =
                    extract_species(species[i], per_species[i], schema, mode, client);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work);
        for (std::thread& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<MatrixRow> rows;
    rows.reserve(extractions.size());
    std::ostringstream audit;
    for (const SpeciesExtraction& e : extractions) {
        rows.push_back(e.row);
        for (const CallAudit& call : e.calls) {
            ordered_json record;
            record["species"] = call.species;
            record["mode"] = to_string(call.mode);
            record["model_id"] = call.model_id;
            record["input_tokens"] = call.input_tokens;
            record["output_tokens"] = call.output_tokens;
            record["cache_hit"] = call.cache_hit;
            record["hallucination_count"] = call.hallucination_count;
            audit << record.dump() << "\n";
        }
        for (const std::string& warning : e.warnings) events.emit("warning", {{"detail", warning}});
        if (e.duplicate_sentences_dropped > 0)
            events.emit("duplicates_dropped",
                        {{"species", e.row.species}, {"count", e.duplicate_sentences_dropped}});
    }
    SpeciesTraitMatrix matrix = rows_to_matrix(rows, schema);
    matrix.save(matrix_path);
    write_file(audit_path, audit.str());

    std::cerr << "extract(" << to_string(mode) << "): coverage " << coverage(matrix) << " over "
              << species.size() << " species\n";
    events.emit("extracted", {{"mode", to_string(mode)},
                              {"species", species.size()},
                              {"coverage", coverage(matrix)}});
}
}  // namespace

void cmd_extract(const PipelineConfig& cfg) {
    if (cfg.species_file.empty()) throw Error("config: species_file is required");
    if (cfg.schema_file.empty()) throw Error("config: schema_file is required");
    EventLog events(cfg.output_dir, "extract");
    run_extraction(cfg, cfg.extractor.mode, cfg.output_dir / "matrix.csv",
                   cfg.output_dir / "extract_audit.jsonl", events);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

void cmd_evaluate(const PipelineConfig& cfg) {
    if (cfg.eval.reference_matrix_file.empty())
        throw Error("config: eval.reference_matrix_file is required");
    EventLog events(cfg.output_dir, "evaluate");

    auto pred_res = SpeciesTraitMatrix::load(cfg.output_dir / "matrix.csv");
    auto ref_res = SpeciesTraitMatrix::load(cfg.eval.reference_matrix_file);
    for (const std::string& w : ref_res.warnings) events.emit("reference_warning", {{"detail", w}});

    EvalReport report = score_matrix(pred_res.matrix, ref_res.matrix);
    write_file(cfg.output_dir / "eval_report.json", report.to_json());
    write_file(cfg.output_dir / "eval_report.txt", report.to_text());
    write_file(cfg.output_dir / "per_trait.csv", per_trait_csv(report.per_trait));

    for (const Trait& trait : ref_res.matrix.schema().traits()) {
        CooccurrenceMatrix ann = cooccurrence(ref_res.matrix, trait.name);
        CooccurrenceMatrix cross = cross_cooccurrence(ref_res.matrix, pred_res.matrix, trait.name);
        std::string base = sanitize_filename(trait.name);
        write_file(cfg.output_dir / "cooccurrence" / (base + "_annotations.csv"), ann.to_csv());
        write_file(cfg.output_dir / "cooccurrence" / (base + "_predictions.csv"), cross.to_csv());
        if (cfg.eval.render_svg) {
            write_file(cfg.output_dir / "cooccurrence" / (base + "_annotations.svg"), ann.to_svg());
            write_file(cfg.output_dir / "cooccurrence" / (base + "_predictions.svg"), cross.to_svg());
        }
    }

    std::cerr << report.to_text();
    events.emit("evaluated", {{"precision", report.precision},
                              {"recall", report.recall},
                              {"f1", report.f1},
                              {"coverage", report.coverage}});
}

// ---------------------------------------------------------------------------
// fn-study
// ---------------------------------------------------------------------------

void cmd_fn_study(const PipelineConfig& cfg) {
    if (cfg.fn_study.input_file.empty()) throw Error("config: fn_study.input_file is required");
    if (cfg.schema_file.empty()) throw Error("config: schema_file is required");
    EventLog events(cfg.output_dir, "fn_study");

    TraitSchema schema = TraitSchema::load(cfg.schema_file);
    std::vector<FnStudyInput> inputs = load_fn_study_csv(cfg.fn_study.input_file);
    LlmClient client(make_llm_backend(cfg.extractor.llm), cfg.extractor.llm, cfg.cache_dir);

    std::vector<FnStudyRecord> records;
    records.reserve(inputs.size());
    for (const FnStudyInput& input : inputs) {
        TraitSchema slice = schema.slice(input.trait);
        std::vector<ScoredSentence> snippet{{input.species, "", input.snippet, 1.0}};
        PromptBundle bundle = build_prompt(input.species, snippet, slice, cfg.extractor.llm);
        LlmCallResult call = client.call(bundle.rendered);
        FnStudyRecord record;
        record.trait = input.trait;
        record.species = input.species;
        record.snippet = input.snippet;
        record.gt_found = input.can_infer;
        try {
            ExtractionResult result = parse_response(call.completion, slice);
            for (const auto& [_, bit] : result.traits.at(0).values)
                record.llm_found = record.llm_found || bit != 0;
        } catch (const UnparseableResponseError&) {
            record.llm_found = false;
        }
        records.push_back(std::move(record));
    }

    ConfusionReport report = binary_confusion(records);
    write_file(cfg.output_dir / "fn_confusion.json", report.to_json());
    write_file(cfg.output_dir / "fn_confusion.txt", report.to_text());
    std::cerr << report.to_text();
    events.emit("fn_study", {{"records", records.size()}, {"macro_f1", report.macro_f1}});
}

// ---------------------------------------------------------------------------
// demo
// ---------------------------------------------------------------------------

bool cmd_demo(const std::filesystem::path& data_dir, const std::filesystem::path& output_dir,
              const std::filesystem::path& cache_dir) {
    CliOverrides overrides;
    overrides.offline = true;
    overrides.output_dir = output_dir;
    overrides.cache_dir = cache_dir;
    PipelineConfig cfg = load_config(data_dir / "config.json", overrides);

    std::cerr << "demo: harvesting from the bundled corpus\n";
    cmd_harvest(cfg);
    std::cerr << "demo: building the weak-label corpus\n";
    cmd_build_corpus(cfg);
    std::cerr << "demo: training the detector\n";
    cmd_train_detector(cfg);
    std::cerr << "demo: scoring sentences\n";
    cmd_detect(cfg);
    std::cerr << "demo: extracting traits (all traits per prompt)\n";
    cmd_extract(cfg);
    std::cerr << "demo: evaluating against the reference matrix\n";
    cmd_evaluate(cfg);
    std::cerr << "demo: running the false-negative study\n";
    cmd_fn_study(cfg);

    std::cerr << "demo: extracting traits (one trait per prompt)\n";
    {
        EventLog events(cfg.output_dir, "extract_single_trait");
        run_extraction(cfg, ExtractionMode::single_trait, cfg.output_dir / "matrix_single_trait.csv",
                       cfg.output_dir / "extract_audit_single_trait.jsonl", events);
    }

    bool ok = true;
    auto compare = [&](const std::filesystem::path& produced, const std::filesystem::path& golden) {
        std::string got = read_file(produced);
        std::string want = read_file(golden);
        if (got == want) {
            std::cout << "demo: " << produced.filename().string() << " matches golden\n";
        } else {
            std::cout << "demo: MISMATCH " << produced.string() << " vs " << golden.string() << "\n";
            ok = false;
        }
    };
    compare(cfg.output_dir / "matrix.csv", data_dir / "golden" / "matrix.csv");
    compare(cfg.output_dir / "eval_report.json", data_dir / "golden" / "eval_report.json");
    compare(cfg.output_dir / "fn_confusion.json", data_dir / "golden" / "fn_confusion.json");

    std::string all_traits = read_file(cfg.output_dir / "matrix.csv");
    std::string single_trait = read_file(cfg.output_dir / "matrix_single_trait.csv");
    if (all_traits == single_trait) {
        std::cout << "demo: all-traits and single-trait matrices are identical\n";
    } else {
        std::cout << "demo: MISMATCH between all-traits and single-trait matrices\n";
        ok = false;
    }
    std::cout << (ok ? "demo: PASS\n" : "demo: FAIL\n");
    return ok;
}

}  // namespace florafill
