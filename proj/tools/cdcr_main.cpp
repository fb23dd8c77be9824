// Command-line entry point for the coreference pipeline:
// ingest -> build-cache -> gen-ftr -> stats -> cache-teacher -> train-roec
// -> train-kd -> infer -> score, plus compare / survey-score / ablation.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cdcr/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string train, dev, test, work_dir;
    double threshold = -1.0;
    double cluster_threshold = -1.0;
    double lambda1 = -1.0;
    double lambda2 = -1.0;
    long long seed = -1;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run-config file");
    cmd->add_option("--train", args.train, "train corpus (jsonl)");
    cmd->add_option("--dev", args.dev, "dev corpus (jsonl)");
    cmd->add_option("--test", args.test, "test corpus (jsonl)");
    cmd->add_option("--work-dir", args.work_dir, "artifact directory");
    cmd->add_option("--threshold", args.threshold,
                    "lemma-heuristic retrieval threshold (default 0.05)");
    cmd->add_option("--cluster-threshold", args.cluster_threshold,
                    "connected-components threshold (default 0.5)");
    cmd->add_option("--lambda1", args.lambda1, "attention-loss weight (default 1.0)");
    cmd->add_option("--lambda2", args.lambda2, "pooled-loss weight (default 0.01)");
    cmd->add_option("--seed", args.seed, "run seed");
}

cdcr::RunConfig resolve_config(const CommonArgs& args) {
    cdcr::RunConfig config;
    if (!args.config_path.empty()) config = cdcr::load_run_config(args.config_path);
    if (!args.train.empty()) config.train_corpus = args.train;
    if (!args.dev.empty()) config.dev_corpus = args.dev;
    if (!args.test.empty()) config.test_corpus = args.test;
    if (!args.work_dir.empty()) config.work_dir = args.work_dir;
    if (args.threshold >= 0.0) config.retrieval_threshold = args.threshold;
    if (args.cluster_threshold >= 0.0) config.cluster_threshold = args.cluster_threshold;
    if (args.lambda1 >= 0.0) config.kd.lambda1 = args.lambda1;
    if (args.lambda2 >= 0.0) config.kd.lambda2 = args.lambda2;
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-document event coreference pipeline"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* ingest = app.add_subcommand("ingest", "validate corpora and report counts");
    add_common_flags(ingest, args);

    auto* build_cache =
        app.add_subcommand("build-cache", "build the train-split lemma-pair cache");
    add_common_flags(build_cache, args);

    auto* gen_ftr = app.add_subcommand("gen-ftr", "generate rationales for training pairs");
    add_common_flags(gen_ftr, args);

    auto* gen_zeroshot =
        app.add_subcommand("gen-zeroshot", "zero-shot labels over test candidates");
    add_common_flags(gen_zeroshot, args);

    auto* stats = app.add_subcommand("stats", "descriptive statistics and Self-BLEU");
    add_common_flags(stats, args);

    auto* cache_teacher =
        app.add_subcommand("cache-teacher", "precompute frozen-teacher states");
    add_common_flags(cache_teacher, args);

    auto* train_roec = app.add_subcommand("train-roec", "rationale-oriented clustering");
    add_common_flags(train_roec, args);

    auto* train_kd = app.add_subcommand("train-kd", "coreference knowledge distillation");
    add_common_flags(train_kd, args);
    std::string roec_ckpt;
    bool no_roec = false;
    bool paired = false;
    bool no_kd = false;
    train_kd->add_option("--roec", roec_ckpt, "ROEC checkpoint directory to start from");
    train_kd->add_flag("--no-roec", no_roec, "train from a raw student encoder");
    train_kd->add_flag("--paired-baseline", paired,
                       "representational-pairing baseline (BCE only)");
    train_kd->add_flag("--no-kd", no_kd, "disable distillation terms (BCE only)");

    auto* infer = app.add_subcommand("infer", "score candidates and emit chains");
    add_common_flags(infer, args);

    auto* score = app.add_subcommand("score", "evaluate predictions against gold");
    add_common_flags(score, args);
    bool emit_conll = false;
    score->add_flag("--emit-conll", emit_conll, "also write CoNLL-style key/response files");

    auto* compare = app.add_subcommand("compare", "system-vs-system decision comparison");
    add_common_flags(compare, args);
    std::string decisions_a, decisions_b;
    compare->add_option("--decisions-a", decisions_a, "decisions jsonl for system A")
        ->required();
    compare->add_option("--decisions-b", decisions_b, "decisions jsonl for system B")
        ->required();

    auto* survey = app.add_subcommand("survey-score", "human-evaluation survey scoring");
    add_common_flags(survey, args);
    std::string responses;
    survey->add_option("--responses", responses, "survey responses jsonl")->required();

    auto* ablation = app.add_subcommand("ablation", "train and score the four variants");
    add_common_flags(ablation, args);

    auto* synth = app.add_subcommand("make-synthetic", "generate a synthetic corpus triple");
    add_common_flags(synth, args);
    std::size_t n_clusters = 10;
    std::size_t n_singletons = 0;
    synth->add_option("--clusters", n_clusters, "non-singleton train clusters");
    synth->add_option("--singletons", n_singletons, "extra singleton clusters");

    CLI11_PARSE(app, argc, argv);

    try {
        cdcr::RunConfig config = resolve_config(args);
        if (ingest->parsed()) {
            cdcr::run_ingest(config);
        } else if (build_cache->parsed()) {
            cdcr::run_build_cache(config);
        } else if (gen_ftr->parsed()) {
            cdcr::run_gen_ftr(config);
        } else if (gen_zeroshot->parsed()) {
            cdcr::run_gen_zeroshot(config);
        } else if (stats->parsed()) {
            cdcr::run_stats(config);
        } else if (cache_teacher->parsed()) {
            cdcr::run_cache_teacher(config);
        } else if (train_roec->parsed()) {
            cdcr::run_train_roec(config);
        } else if (train_kd->parsed()) {
            if (paired) config.paired_baseline = true;
            if (paired || no_kd) config.use_kd = false;
            std::optional<std::filesystem::path> parent;
            if (!roec_ckpt.empty() && !no_roec) parent = roec_ckpt;
            cdcr::run_train_kd(config, parent);
        } else if (infer->parsed()) {
            cdcr::run_infer(config);
        } else if (score->parsed()) {
            cdcr::ScoreReport report = cdcr::run_score(config, emit_conll);
            std::cout << cdcr::render_score_report(report);
        } else if (compare->parsed()) {
            cdcr::run_compare(config, decisions_a, decisions_b);
        } else if (survey->parsed()) {
            cdcr::run_survey_score(config, responses);
        } else if (ablation->parsed()) {
            for (const auto& row : cdcr::run_ablation(config)) {
                std::cout << row.variant << "  B3 F1 " << row.b3_f1 << "  CoNLL F1 "
                          << row.conll_f1 << "\n";
            }
        } else if (synth->parsed()) {
            cdcr::run_make_synthetic(config, n_clusters, n_singletons);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
