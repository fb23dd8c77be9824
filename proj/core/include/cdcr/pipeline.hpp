#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdcr/distill.hpp"
#include "cdcr/metrics.hpp"
#include "cdcr/roec.hpp"

namespace cdcr {

// Resolved configuration for a pipeline run. Every stage embeds the
// resolved config (and input hashes) in its output manifest.
struct RunConfig {
    std::filesystem::path train_corpus;
    std::filesystem::path dev_corpus;
    std::filesystem::path test_corpus;
    std::filesystem::path work_dir = "work";  // caches, stores, checkpoints, reports

    RoecConfig roec;
    KdConfig kd;
    double retrieval_threshold = 0.05;
    double cluster_threshold = 0.5;
    std::uint64_t seed = 42;

    std::size_t student_dim = 16;
    std::size_t student_heads = 2;
    std::size_t student_layers = 2;
    std::size_t student_max_len = 256;
    std::size_t teacher_dim = 32;
    std::size_t teacher_heads = 4;
    std::size_t teacher_layers = 2;

    bool use_roec = true;
    bool use_kd = true;
    bool paired_baseline = false;
    int gen_parallelism = 1;

    // Derived locations under work_dir.
    std::filesystem::path lemma_cache_path() const { return work_dir / "lemma_cache.json"; }
    std::filesystem::path rationale_store_path() const { return work_dir / "rationales.jsonl"; }
    std::filesystem::path teacher_cache_dir() const { return work_dir / "teacher_cache"; }
    std::filesystem::path roec_checkpoint_dir() const { return work_dir / "roec_ckpt"; }
    std::filesystem::path kd_checkpoint_dir() const { return work_dir / "kd_ckpt"; }
    std::filesystem::path predictions_path() const { return work_dir / "predictions.jsonl"; }
    std::filesystem::path report_dir() const { return work_dir / "reports"; }
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Stage runners. Each writes its outputs atomically plus a
// <output>.manifest.json with {stage, config hash, seed, input hashes}.
void run_ingest(const RunConfig& config);
void run_build_cache(const RunConfig& config);
void run_gen_ftr(const RunConfig& config);
void run_gen_zeroshot(const RunConfig& config);
void run_stats(const RunConfig& config);
void run_cache_teacher(const RunConfig& config);
void run_train_roec(const RunConfig& config);
// roec_checkpoint empty => train from a raw student (-ROEC ablations).
void run_train_kd(const RunConfig& config,
                  const std::optional<std::filesystem::path>& roec_checkpoint);
void run_infer(const RunConfig& config);
ScoreReport run_score(const RunConfig& config, bool emit_conll = false);
void run_compare(const RunConfig& config, const std::filesystem::path& decisions_a,
                 const std::filesystem::path& decisions_b);
void run_survey_score(const RunConfig& config, const std::filesystem::path& responses_path);

struct AblationRow {
    std::string variant;
    double b3_f1 = 0.0;
    double conll_f1 = 0.0;
};

// Trains and scores the four variants {paired, +ROEC-KD, -ROEC+KD,
// +ROEC+KD} with a shared seed and emits a comparison table.
std::vector<AblationRow> run_ablation(const RunConfig& config);

// Generates synthetic train/dev/test splits under the configured corpus
// paths.
void run_make_synthetic(const RunConfig& config, std::size_t n_clusters,
                        std::size_t n_singletons);

}  // namespace cdcr
