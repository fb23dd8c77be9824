#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cdcr/corpus.hpp"
#include "cdcr/encoders.hpp"
#include "cdcr/lemma_heuristic.hpp"
#include "cdcr/rationales.hpp"

namespace cdcr {

// Class labels are 1-based: non-singleton clusters take 1..N in sorted
// cluster_id order, the dummy class N+1 holds all singletons and every
// negative pair.
struct ClusterIndex {
    std::map<std::string, std::size_t> index;  // non-singleton cluster_id -> 1..N
    std::size_t n_clusters = 0;                // N

    std::size_t dummy_class() const { return n_clusters + 1; }
    std::size_t num_classes() const { return n_clusters + 1; }
    std::size_t class_of(const std::string& cluster_id) const;
    std::size_t target_for(const MentionPair& pair) const;  // negatives -> dummy
};

ClusterIndex build_cluster_index(const CorpusSplit& train_split);

// Mean over the batch of negative log-softmax at the target column
// (0-based columns).
double loss_cluster(const nn::Mat& logits, const std::vector<std::size_t>& targets);
nn::Mat loss_cluster_grad(const nn::Mat& logits, const std::vector<std::size_t>& targets);

// Sum over rows of (1 - cos(p_i, r_i)); throws on zero-norm rows.
double loss_rationale(const nn::Mat& P, const nn::Mat& R);
std::pair<nn::Mat, nn::Mat> loss_rationale_grads(const nn::Mat& P, const nn::Mat& R);

double loss_roec(double cluster, double rationale, double lambda);

struct RoecConfig {
    double lambda_rationale = 1.0;
    double negative_threshold = 0.05;
    std::size_t batch_size = 40;
    double learning_rate = 1e-5;
    std::size_t epochs = 20;
    // Eq. as written sums the rationale term over the batch; this switch
    // divides by m for scale experiments.
    bool normalize_rationale_loss = false;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 42;
};

struct TrainStep {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double loss_cluster = 0.0;
    double loss_rationale = 0.0;
    double loss_total = 0.0;
};

struct RoecResult {
    StudentModel model;
    nn::Mat cluster_head_w;  // D_S x (N+1)
    nn::Mat cluster_head_b;  // 1 x (N+1)
    ClusterIndex clusters;
    std::vector<TrainStep> log;
    std::size_t skipped_pairs = 0;  // pairs dropped for missing rationales
};

// Joint cluster-classification + rationale-alignment training. Positives
// are all same-cluster pairs; negatives come from the lemma heuristic at
// config.negative_threshold restricted to label-0 pairs.
RoecResult train_roec(const CorpusSplit& train_split, const RationaleStore& rationales,
                      StudentModel student, const RoecConfig& config);

// Mean loss of all steps within one epoch of a training log.
double epoch_mean_loss(const std::vector<TrainStep>& log, std::size_t epoch);

// Binary proxy accuracy of the cluster head on a held-out split: a pair
// counts as coreferent when its argmax class is not the dummy class.
double cluster_head_dev_accuracy(const RoecResult& trained, const CorpusSplit& dev,
                                 double negative_threshold,
                                 const LemmaPairCache& train_cache);

struct LambdaSearchResult {
    double best_lambda = 1.0;
    std::map<double, double> dev_accuracy;
};

LambdaSearchResult tune_lambda_roec(const CorpusSplit& train_split, const CorpusSplit& dev_split,
                                    const RationaleStore& rationales,
                                    const StudentModel& initial, const RoecConfig& base_config,
                                    const std::vector<double>& grid);

std::string train_log_to_jsonl(const std::vector<TrainStep>& log);

}  // namespace cdcr
