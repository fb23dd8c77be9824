#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdcr/corpus.hpp"
#include "cdcr/encoders.hpp"
#include "cdcr/rationales.hpp"
#include "cdcr/tensor_cache.hpp"

namespace cdcr {

// Student head i in [1, h] sources supervision from teacher head
// f(i) = i + H - h. Returned values are 1-based teacher head indices.
std::vector<std::size_t> head_map(std::size_t H, std::size_t h);

// Span pooling + classifier on top of the student encoder. e_k is the
// softmax-weighted sum of the trigger-span token vectors under a learned
// scoring vector; the pair representation is
// [pooled | e1 | e2 | e1 (.) e2] of width 4 * D_S.
struct PairwiseScorerHead {
    nn::Mat span_scorer;  // 1 x D
    nn::Mat w1;           // 4D x D
    nn::Mat b1;           // 1 x D
    nn::Mat w2;           // D x 1
    nn::Mat b2;           // 1 x 1

    static PairwiseScorerHead init(std::size_t dim, Rng& rng);
    std::vector<nn::Mat*> parameters();
};

// Plain (tape-free) pair representation for a finished encoding.
nn::Mat pairwise_rep(const StudentEncoding& encoding, TokenSpan span1, TokenSpan span2,
                     const nn::Mat& span_scorer);

// Mean binary cross entropy over sigmoid(logits).
double loss_task(const std::vector<double>& logits, const std::vector<double>& labels);
std::vector<double> loss_task_grad(const std::vector<double>& logits,
                                   const std::vector<double>& labels);

// Sum over student heads of || S_i - T_f(i) ||^2 on K-length summaries.
double loss_attention(const AttentionSummary& student, const AttentionSummary& teacher,
                      const std::vector<std::size_t>& mapping);
nn::Mat loss_attention_grad(const AttentionSummary& student, const AttentionSummary& teacher,
                            const std::vector<std::size_t>& mapping);

// || Rh_S - Rh_T W ||^2 over the batch block.
double loss_pooled(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w);
nn::Mat loss_pooled_grad_w(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w);
nn::Mat loss_pooled_grad_s(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w);

double loss_kd(double task, double attention, double pooled, double lambda1, double lambda2);

struct KdConfig {
    double lambda1 = 1.0;
    double lambda2 = 0.01;
    std::size_t batch_size = 16;
    double model_lr = 1e-5;
    double classifier_lr = 1e-3;
    std::size_t epochs = 10;
    double negative_threshold = 0.05;
    std::size_t attention_summary_len = 128;  // K
    // Squared norms are plain sums over the batch block as written; this
    // divides the distillation terms by m.
    bool normalize_by_batch = false;
    // Representational-pairing baseline: rationale text is concatenated
    // into the scorer input at train time and the KD terms are disabled.
    bool paired_baseline = false;
    std::uint64_t seed = 7;
};

struct KdStep {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double loss_task = 0.0;
    double loss_attention = 0.0;
    double loss_pooled = 0.0;
    double loss_total = 0.0;
};

struct PairwiseScorer {
    StudentModel model;
    PairwiseScorerHead head;
};

struct KdResult {
    PairwiseScorer scorer;
    nn::Mat projection_w;  // D_T x D_S; empty when lambda2 uses no teacher
    std::vector<KdStep> log;
    std::size_t skipped_pairs = 0;
};

// Pairwise-scorer training with optional attention/hidden-state transfer
// from cached frozen-teacher states. The cache may be null only when
// lambda1 = lambda2 = 0 (task-only and paired-baseline runs).
KdResult train_kd(const CorpusSplit& train_split, const RationaleStore& rationales,
                  const TeacherCache* teacher_cache, StudentModel student,
                  const KdConfig& config);

// Coreference probability for a pair; the input contains only the two
// marked sentences, never rationale text.
double score_pair(const PairwiseScorer& scorer, const MentionPair& pair);

// Fraction of pairs whose thresholded score (>= 0.5) matches the gold label.
double pairwise_accuracy(const PairwiseScorer& scorer,
                         const std::vector<MentionPair>& pairs);

std::string kd_log_to_jsonl(const std::vector<KdStep>& log);

}  // namespace cdcr
