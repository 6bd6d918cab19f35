#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "florafill/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool offline = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "pipeline configuration JSON");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "override the configured random seed");
    cmd->add_flag("--offline", args.offline, "forbid network use; force mock backends");
}

florafill::PipelineConfig load(const CommonArgs& args) {
    florafill::CliOverrides overrides;
    overrides.seed = args.seed;
    overrides.offline = args.offline;
    return florafill::load_config(args.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"florafill: fill species-trait matrices from unstructured web text"};
    app.require_subcommand(1);

    CommonArgs harvest_args, corpus_args, train_args, detect_args, extract_args, eval_args, fn_args;

    auto* harvest = app.add_subcommand("harvest", "search, fetch and sentence-split candidate pages");
    add_common(harvest, harvest_args);
    auto* build_corpus =
        app.add_subcommand("build-corpus", "weak-label sectioned documents into a training corpus");
    add_common(build_corpus, corpus_args);
    auto* train = app.add_subcommand("train-detector", "train the descriptive-sentence classifier");
    add_common(train, train_args);
    auto* detect = app.add_subcommand("detect", "score harvested sentences and keep descriptive ones");
    add_common(detect, detect_args);
    auto* extract = app.add_subcommand("extract", "prompt the LLM and build the species-trait matrix");
    add_common(extract, extract_args);
    auto* evaluate = app.add_subcommand("evaluate", "compare the matrix against a reference matrix");
    add_common(evaluate, eval_args);
    auto* fn_study = app.add_subcommand("fn-study", "false-negative study against expert verdicts");
    add_common(fn_study, fn_args);

    std::string demo_data = "data/demo";
    std::string demo_out = "demo_output";
    std::string demo_cache = "demo_cache";
    auto* demo = app.add_subcommand("demo", "full offline run on the bundled fixtures");
    demo->add_option("--data-dir", demo_data, "bundled demo data directory");
    demo->add_option("--output-dir", demo_out, "where demo outputs are written");
    demo->add_option("--cache-dir", demo_cache, "demo cache directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (harvest->parsed()) florafill::cmd_harvest(load(harvest_args));
        else if (build_corpus->parsed()) florafill::cmd_build_corpus(load(corpus_args));
        else if (train->parsed()) florafill::cmd_train_detector(load(train_args));
        else if (detect->parsed()) florafill::cmd_detect(load(detect_args));
        else if (extract->parsed()) florafill::cmd_extract(load(extract_args));
        else if (evaluate->parsed()) florafill::cmd_evaluate(load(eval_args));
        else if (fn_study->parsed()) florafill::cmd_fn_study(load(fn_args));
        else if (demo->parsed()) return florafill::cmd_demo(demo_data, demo_out, demo_cache) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
