#include "cdcr/roec.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/nn/adam.hpp"
#include "cdcr/nn/tape.hpp"

namespace cdcr {

std::size_t ClusterIndex::class_of(const std::string& cluster_id) const {
    auto it = index.find(cluster_id);
    return it == index.end() ? dummy_class() : it->second;
}

std::size_t ClusterIndex::target_for(const MentionPair& pair) const {
    if (pair.label != 1) return dummy_class();
    return class_of(pair.m1->gold_cluster_id);
}

ClusterIndex build_cluster_index(const CorpusSplit& train_split) {
    ClusterIndex ci;
    // std::map iterates in sorted cluster_id order, which fixes the indices.
    for (const auto& [cluster_id, members] : train_split.clusters()) {
        if (members.size() < 2) continue;
        ci.index[cluster_id] = ci.index.size() + 1;
    }
    ci.n_clusters = ci.index.size();
    return ci;
}

double loss_cluster(const nn::Mat& logits, const std::vector<std::size_t>& targets) {
    nn::Tape tape;
    auto l = tape.input(logits);
    auto loss = tape.cross_entropy_mean(l, targets);
    return tape.value(loss)(0, 0);
}

nn::Mat loss_cluster_grad(const nn::Mat& logits, const std::vector<std::size_t>& targets) {
    nn::Tape tape;
    auto l = tape.input(logits);
    auto loss = tape.cross_entropy_mean(l, targets);
    tape.backward(loss);
    return tape.grad(l);
}

double loss_rationale(const nn::Mat& P, const nn::Mat& R) {
    nn::Tape tape;
    auto p = tape.input(P);
    auto r = tape.input(R);
    auto loss = tape.cosine_align_loss(p, r);
    return tape.value(loss)(0, 0);
}

std::pair<nn::Mat, nn::Mat> loss_rationale_grads(const nn::Mat& P, const nn::Mat& R) {
    nn::Tape tape;
    auto p = tape.input(P);
    auto r = tape.input(R);
    auto loss = tape.cosine_align_loss(p, r);
    tape.backward(loss);
    return {tape.grad(p), tape.grad(r)};
}

double loss_roec(double cluster, double rationale, double lambda) {
    if (lambda < 0.0) throw ValidationError("loss_roec: lambda must be >= 0");
    return cluster + lambda * rationale;
}

namespace {

struct RoecSample {
    MentionPair pair;
    std::size_t target_col = 0;  // 0-based column into the logits
    const Rationale* rationale = nullptr;
};

}  // namespace

RoecResult train_roec(const CorpusSplit& train_split, const RationaleStore& rationales,
                      StudentModel student, const RoecConfig& config) {
    if (config.lambda_rationale < 0.0) throw ValidationError("train_roec: lambda must be >= 0");

    ClusterIndex clusters = build_cluster_index(train_split);

    std::vector<MentionPair> positives = positive_pairs(train_split);
    if (positives.empty()) throw ValidationError("train_roec: no positive pairs in train split");

    LemmaPairCache cache = build_cache(train_split);
    std::vector<MentionPair> label0;
    for (auto& p : enumerate_pairs(train_split, PairScope::All)) {
        if (p.label == 0) label0.push_back(std::move(p));
    }
    std::vector<MentionPair> negatives =
        retrieve_candidates(cache, label0, config.negative_threshold);

    RoecResult result;
    result.clusters = clusters;

    std::vector<RoecSample> samples;
    auto add_sample = [&](const MentionPair& pair) {
        const Rationale* r = rationales.find(pair.pair_id);
        if (!r) {
            result.skipped_pairs += 1;
            return;
        }
        samples.push_back({pair, clusters.target_for(pair) - 1, r});
    };
    for (const auto& p : positives) add_sample(p);
    for (const auto& p : negatives) add_sample(p);
    if (samples.empty()) throw ValidationError("train_roec: no trainable pairs with rationales");

    std::size_t n_classes = clusters.num_classes();
    std::size_t dim = student.net.config().dim;
    Rng rng(config.seed);
    result.cluster_head_w = nn::Mat(dim, n_classes);
    {
        double a = std::sqrt(3.0 / static_cast<double>(dim));
        for (double& v : result.cluster_head_w.raw()) v = rng.uniform(-a, a);
    }
    result.cluster_head_b = nn::Mat(1, n_classes, 0.0);

    std::vector<nn::Mat*> trainable = student.net.parameters();
    trainable.push_back(&result.cluster_head_w);
    trainable.push_back(&result.cluster_head_b);
    nn::Adam optimizer(trainable, {config.learning_rate, config.adam_beta1, config.adam_beta2,
                                   config.adam_eps});

    std::size_t global_step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(samples);
        for (std::size_t at = 0; at < samples.size(); at += config.batch_size) {
            std::size_t end = std::min(at + config.batch_size, samples.size());

            nn::Tape tape;
            auto staged = student.net.stage_params(tape);
            auto head_w = tape.input(result.cluster_head_w);
            auto head_b = tape.input(result.cluster_head_b);

            std::vector<nn::Var> pair_pooled, rat_pooled;
            std::vector<std::size_t> targets;
            for (std::size_t i = at; i < end; ++i) {
                const RoecSample& s = samples[i];
                auto pair_toks = student_pair_tokens(student, s.pair);
                pair_pooled.push_back(
                    student.net.forward(tape, pair_toks.ids, staged).pooled);
                auto rat_toks = student_text_tokens(student, s.rationale->text);
                rat_pooled.push_back(student.net.forward(tape, rat_toks, staged).pooled);
                targets.push_back(s.target_col);
            }

            nn::Var P = tape.concat_rows(pair_pooled);
            nn::Var R = tape.concat_rows(rat_pooled);
            nn::Var logits = tape.add_row_broadcast(tape.matmul(P, head_w), head_b);
            nn::Var l_cluster = tape.cross_entropy_mean(logits, targets);
            nn::Var l_rationale = tape.cosine_align_loss(P, R);
            if (config.normalize_rationale_loss) {
                l_rationale = tape.scale(l_rationale,
                                         1.0 / static_cast<double>(end - at));
            }
            nn::Var total =
                tape.add(l_cluster, tape.scale(l_rationale, config.lambda_rationale));
            tape.backward(total);

            std::vector<nn::Mat> grads;
            grads.reserve(trainable.size());
            for (auto var : staged) grads.push_back(tape.grad(var));
            grads.push_back(tape.grad(head_w));
            grads.push_back(tape.grad(head_b));
            optimizer.step(grads);

            TrainStep step;
            step.epoch = epoch;
            step.step = global_step++;
            step.loss_cluster = tape.value(l_cluster)(0, 0);
            step.loss_rationale = tape.value(l_rationale)(0, 0);
            step.loss_total = tape.value(total)(0, 0);
            result.log.push_back(step);
        }
    }

    result.model = std::move(student);
    return result;
}

double epoch_mean_loss(const std::vector<TrainStep>& log, std::size_t epoch) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : log) {
        if (s.epoch == epoch) {
            sum += s.loss_total;
            ++n;
        }
    }
    if (n == 0) throw ValidationError("epoch_mean_loss: no steps for epoch");
    return sum / static_cast<double>(n);
}

double cluster_head_dev_accuracy(const RoecResult& trained, const CorpusSplit& dev,
                                 double negative_threshold,
                                 const LemmaPairCache& train_cache) {
    std::vector<MentionPair> candidates;
    for (auto& p : positive_pairs(dev)) candidates.push_back(std::move(p));
    std::vector<MentionPair> label0;
    for (auto& p : enumerate_pairs(dev, PairScope::All)) {
        if (p.label == 0) label0.push_back(std::move(p));
    }
    for (auto& p : retrieve_candidates(train_cache, label0, negative_threshold)) {
        candidates.push_back(std::move(p));
    }
    if (candidates.empty()) throw ValidationError("dev accuracy: no candidate pairs");

    std::size_t dummy_col = trained.clusters.dummy_class() - 1;
    std::size_t correct = 0;
    for (const auto& pair : candidates) {
        PairEncoding enc = encode_pair_student(trained.model, pair);
        nn::Mat logits = nn::matmul(enc.encoding.pooled, trained.cluster_head_w);
        for (std::size_t c = 0; c < logits.cols(); ++c) {
            logits(0, c) += trained.cluster_head_b(0, c);
        }
        std::size_t argmax = 0;
        for (std::size_t c = 1; c < logits.cols(); ++c) {
            if (logits(0, c) > logits(0, argmax)) argmax = c;
        }
        bool predicted_coref = argmax != dummy_col;
        if (predicted_coref == (pair.label == 1)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(candidates.size());
}

LambdaSearchResult tune_lambda_roec(const CorpusSplit& train_split, const CorpusSplit& dev_split,
                                    const RationaleStore& rationales,
                                    const StudentModel& initial, const RoecConfig& base_config,
                                    const std::vector<double>& grid) {
    if (grid.empty()) throw ValidationError("tune_lambda_roec: empty grid");
    LemmaPairCache cache = build_cache(train_split);
    LambdaSearchResult out;
    double best = -1.0;
    for (double lambda : grid) {
        RoecConfig cfg = base_config;
        cfg.lambda_rationale = lambda;
        RoecResult trained = train_roec(train_split, rationales, initial, cfg);
        double acc =
            cluster_head_dev_accuracy(trained, dev_split, cfg.negative_threshold, cache);
        out.dev_accuracy[lambda] = acc;
        if (acc > best) {
            best = acc;
            out.best_lambda = lambda;
        }
    }
    return out;
}

std::string train_log_to_jsonl(const std::vector<TrainStep>& log) {
    std::string out;
    for (const auto& s : log) {
        nlohmann::json j = {{"epoch", s.epoch},
                            {"step", s.step},
                            {"loss_cluster", s.loss_cluster},
                            {"loss_rationale", s.loss_rationale},
                            {"loss_total", s.loss_total}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cdcr
