#include "cdcr/distill.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/lemma_heuristic.hpp"
#include "cdcr/nn/adam.hpp"
#include "cdcr/nn/tape.hpp"

namespace cdcr {

std::vector<std::size_t> head_map(std::size_t H, std::size_t h) {
    if (h < 1 || h > H) throw ValidationError("head_map: need 1 <= h <= H");
    std::vector<std::size_t> f(h);
    for (std::size_t i = 1; i <= h; ++i) f[i - 1] = i + H - h;
    return f;
}

PairwiseScorerHead PairwiseScorerHead::init(std::size_t dim, Rng& rng) {
    PairwiseScorerHead head;
    auto uniform_mat = [&](std::size_t r, std::size_t c) {
        double a = std::sqrt(3.0 / static_cast<double>(r));
        nn::Mat m(r, c);
        for (double& v : m.raw()) v = rng.uniform(-a, a);
        return m;
    };
    head.span_scorer = uniform_mat(1, dim);
    head.w1 = uniform_mat(4 * dim, dim);
    head.b1 = nn::Mat(1, dim, 0.0);
    head.w2 = uniform_mat(dim, 1);
    head.b2 = nn::Mat(1, 1, 0.0);
    return head;
}

std::vector<nn::Mat*> PairwiseScorerHead::parameters() {
    return {&span_scorer, &w1, &b1, &w2, &b2};
}

namespace {

// Softmax-weighted span sum as tape ops; spans must be nonempty.
nn::Var span_pool(nn::Tape& tape, nn::Var tokens, TokenSpan span, nn::Var span_scorer) {
    if (span.length() == 0) throw ValidationError("span pooling: empty span");
    nn::Var toks = tape.slice_rows(tokens, span.begin, span.end);      // L x D
    nn::Var scores = tape.matmul(toks, tape.transpose(span_scorer));   // L x 1
    nn::Var weights = tape.softmax_rows(tape.transpose(scores));       // 1 x L
    return tape.matmul(weights, toks);                                 // 1 x D
}

nn::Var pairwise_rep_var(nn::Tape& tape, nn::Var tokens, nn::Var pooled, TokenSpan span1,
                         TokenSpan span2, nn::Var span_scorer) {
    nn::Var e1 = span_pool(tape, tokens, span1, span_scorer);
    nn::Var e2 = span_pool(tape, tokens, span2, span_scorer);
    return tape.concat_cols({pooled, e1, e2, tape.mul(e1, e2)});
}

nn::Var classifier_logit(nn::Tape& tape, nn::Var rep, nn::Var w1, nn::Var b1, nn::Var w2,
                         nn::Var b2) {
    nn::Var hidden = tape.relu(tape.add_row_broadcast(tape.matmul(rep, w1), b1));
    return tape.add_row_broadcast(tape.matmul(hidden, w2), b2);  // 1 x 1
}

}  // namespace

nn::Mat pairwise_rep(const StudentEncoding& encoding, TokenSpan span1, TokenSpan span2,
                     const nn::Mat& span_scorer) {
    if (span1.end > encoding.token_vectors.rows() || span2.end > encoding.token_vectors.rows()) {
        throw ValidationError("pairwise_rep: span out of token range");
    }
    nn::Tape tape;
    nn::Var tokens = tape.constant(encoding.token_vectors);
    nn::Var pooled = tape.constant(encoding.pooled);
    nn::Var scorer = tape.constant(span_scorer);
    nn::Var rep = pairwise_rep_var(tape, tokens, pooled, span1, span2, scorer);
    return tape.value(rep);
}

double loss_task(const std::vector<double>& logits, const std::vector<double>& labels) {
    if (logits.size() != labels.size()) throw ValidationError("loss_task: size mismatch");
    nn::Tape tape;
    nn::Mat z(logits.size(), 1);
    for (std::size_t i = 0; i < logits.size(); ++i) z(i, 0) = logits[i];
    auto v = tape.bce_with_logits_mean(tape.input(z), labels);
    return tape.value(v)(0, 0);
}

std::vector<double> loss_task_grad(const std::vector<double>& logits,
                                   const std::vector<double>& labels) {
    nn::Tape tape;
    nn::Mat z(logits.size(), 1);
    for (std::size_t i = 0; i < logits.size(); ++i) z(i, 0) = logits[i];
    auto in = tape.input(z);
    auto v = tape.bce_with_logits_mean(in, labels);
    tape.backward(v);
    const nn::Mat& g = tape.grad(in);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = g(i, 0);
    return out;
}

namespace {

void check_attention_shapes(const AttentionSummary& student, const AttentionSummary& teacher,
                            const std::vector<std::size_t>& mapping) {
    if (student.per_head.cols() != teacher.per_head.cols()) {
        throw ValidationError("loss_attention: summary length K mismatch");
    }
    if (mapping.size() != student.per_head.rows()) {
        throw ValidationError("loss_attention: mapping size != student heads");
    }
    for (std::size_t t : mapping) {
        if (t < 1 || t > teacher.per_head.rows()) {
            throw ValidationError("loss_attention: mapped teacher head out of range");
        }
    }
}

}  // namespace

double loss_attention(const AttentionSummary& student, const AttentionSummary& teacher,
                      const std::vector<std::size_t>& mapping) {
    check_attention_shapes(student, teacher, mapping);
    double sum = 0.0;
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        std::size_t t = mapping[i] - 1;
        for (std::size_t k = 0; k < student.per_head.cols(); ++k) {
            double d = student.per_head(i, k) - teacher.per_head(t, k);
            sum += d * d;
        }
    }
    return sum;
}

nn::Mat loss_attention_grad(const AttentionSummary& student, const AttentionSummary& teacher,
                            const std::vector<std::size_t>& mapping) {
    check_attention_shapes(student, teacher, mapping);
    nn::Mat g(student.per_head.rows(), student.per_head.cols());
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        std::size_t t = mapping[i] - 1;
        for (std::size_t k = 0; k < student.per_head.cols(); ++k) {
            g(i, k) = 2.0 * (student.per_head(i, k) - teacher.per_head(t, k));
        }
    }
    return g;
}

double loss_pooled(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w) {
    if (rh_t.cols() != w.rows() || rh_s.cols() != w.cols() || rh_s.rows() != rh_t.rows()) {
        throw ValidationError("loss_pooled: dimension mismatch");
    }
    return nn::sq_frobenius_diff(rh_s, nn::matmul(rh_t, w));
}

namespace {

nn::Mat pooled_residual(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w) {
    nn::Mat proj = nn::matmul(rh_t, w);
    nn::Mat r(rh_s.rows(), rh_s.cols());
    for (std::size_t i = 0; i < r.size(); ++i) r.raw()[i] = rh_s.raw()[i] - proj.raw()[i];
    return r;
}

}  // namespace

nn::Mat loss_pooled_grad_w(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w) {
    if (rh_t.cols() != w.rows() || rh_s.cols() != w.cols() || rh_s.rows() != rh_t.rows()) {
        throw ValidationError("loss_pooled: dimension mismatch");
    }
    // d/dW ||S - T W||^2 = -2 T^T (S - T W)
    nn::Mat r = pooled_residual(rh_s, rh_t, w);
    nn::Mat g = nn::matmul(nn::transpose(rh_t), r);
    for (double& v : g.raw()) v *= -2.0;
    return g;
}

nn::Mat loss_pooled_grad_s(const nn::Mat& rh_s, const nn::Mat& rh_t, const nn::Mat& w) {
    nn::Mat r = pooled_residual(rh_s, rh_t, w);
    for (double& v : r.raw()) v *= 2.0;
    return r;
}

double loss_kd(double task, double attention, double pooled, double lambda1, double lambda2) {
    return task + lambda1 * attention + lambda2 * pooled;
}

namespace {

struct KdSample {
    MentionPair pair;
    double label = 0.0;
    const Rationale* rationale = nullptr;  // null only in task-only runs
};

}  // namespace

KdResult train_kd(const CorpusSplit& train_split, const RationaleStore& rationales,
                  const TeacherCache* teacher_cache, StudentModel student,
                  const KdConfig& config) {
    bool use_kd_terms = config.lambda1 != 0.0 || config.lambda2 != 0.0;
    if (config.paired_baseline && use_kd_terms) {
        throw ValidationError("train_kd: paired_baseline requires lambda1 = lambda2 = 0");
    }
    if (use_kd_terms && teacher_cache == nullptr) {
        throw ValidationError("train_kd: teacher cache required when lambda1 or lambda2 > 0");
    }
    bool needs_rationale_text = use_kd_terms || config.paired_baseline;

    std::vector<MentionPair> positives = positive_pairs(train_split);
    if (positives.empty()) throw ValidationError("train_kd: no positive pairs in train split");
    LemmaPairCache cache = build_cache(train_split);
    std::vector<MentionPair> label0;
    for (auto& p : enumerate_pairs(train_split, PairScope::All)) {
        if (p.label == 0) label0.push_back(std::move(p));
    }
    std::vector<MentionPair> negatives =
        retrieve_candidates(cache, label0, config.negative_threshold);

    KdResult result;
    std::vector<KdSample> samples;
    auto add_sample = [&](const MentionPair& pair) {
        KdSample s;
        s.pair = pair;
        s.label = pair.label;
        if (needs_rationale_text) {
            s.rationale = rationales.find(pair.pair_id);
            if (!s.rationale) {
                result.skipped_pairs += 1;
                return;
            }
        }
        if (use_kd_terms && !teacher_cache->has(pair.pair_id)) {
            throw ValidationError("train_kd: missing teacher cache entry for pair " +
                                  pair.pair_id);
        }
        samples.push_back(std::move(s));
    };
    for (const auto& p : positives) add_sample(p);
    for (const auto& p : negatives) add_sample(p);
    if (samples.empty()) throw ValidationError("train_kd: no trainable pairs");

    std::size_t dim = student.net.config().dim;
    std::size_t student_heads = student.net.config().heads;
    Rng rng(config.seed);
    PairwiseScorerHead head = PairwiseScorerHead::init(dim, rng);

    std::vector<std::size_t> mapping;
    if (use_kd_terms) {
        // Teacher head count comes from the cached summaries.
        const auto& first = teacher_cache->get(samples.front().pair.pair_id);
        std::size_t teacher_heads = first.summary.per_head.rows();
        mapping = head_map(teacher_heads, student_heads);
        if (config.lambda2 != 0.0) {
            std::size_t teacher_dim = first.pooled.cols();
            result.projection_w = nn::Mat(teacher_dim, dim);
            double a = std::sqrt(3.0 / static_cast<double>(teacher_dim));
            for (double& v : result.projection_w.raw()) v = rng.uniform(-a, a);
        }
    }
    bool train_w = result.projection_w.size() > 0;

    std::vector<nn::Mat*> encoder_params = student.net.parameters();
    std::vector<nn::Mat*> classifier_params = head.parameters();
    if (train_w) classifier_params.push_back(&result.projection_w);

    nn::Adam encoder_opt(encoder_params, {config.model_lr});
    nn::Adam classifier_opt(classifier_params, {config.classifier_lr});

    std::size_t global_step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(samples);
        for (std::size_t at = 0; at < samples.size(); at += config.batch_size) {
            std::size_t end = std::min(at + config.batch_size, samples.size());
            std::size_t m = end - at;

            nn::Tape tape;
            auto staged = student.net.stage_params(tape);
            nn::Var span_scorer = tape.input(head.span_scorer);
            nn::Var w1 = tape.input(head.w1);
            nn::Var b1 = tape.input(head.b1);
            nn::Var w2 = tape.input(head.w2);
            nn::Var b2 = tape.input(head.b2);
            nn::Var proj_w;
            if (train_w) proj_w = tape.input(result.projection_w);

            std::vector<nn::Var> logit_rows;
            std::vector<double> labels;
            std::vector<nn::Var> rh_s_rows, rh_t_rows;
            nn::Var l_attention, l_pooled;
            bool have_attention = false;

            for (std::size_t i = at; i < end; ++i) {
                const KdSample& s = samples[i];
                std::optional<std::string> extra;
                if (config.paired_baseline) extra = s.rationale->text;
                PairTokens toks = student_pair_tokens(student, s.pair, extra);
                auto fwd = student.net.forward(tape, toks.ids, staged);
                nn::Var rep = pairwise_rep_var(tape, fwd.tokens, fwd.pooled, toks.trigger1,
                                               toks.trigger2, span_scorer);
                logit_rows.push_back(classifier_logit(tape, rep, w1, b1, w2, b2));
                labels.push_back(s.label);

                if (use_kd_terms) {
                    auto rat_ids = student_text_tokens(student, s.rationale->text);
                    auto rat_fwd = student.net.forward(tape, rat_ids, staged);
                    const auto& cached = teacher_cache->get(s.pair.pair_id);
                    if (config.lambda1 != 0.0) {
                        nn::Var summary = summarize_attention_var(
                            tape, rat_fwd.attention, config.attention_summary_len);
                        std::vector<std::size_t> rows0;
                        rows0.reserve(mapping.size());
                        for (std::size_t t : mapping) rows0.push_back(t - 1);
                        nn::Var teacher_rows = tape.gather_rows(
                            tape.constant(cached.summary.per_head), rows0);
                        nn::Var diff = tape.sub(summary, teacher_rows);
                        nn::Var term = tape.sum_all(tape.mul(diff, diff));
                        l_attention = have_attention ? tape.add(l_attention, term) : term;
                        have_attention = true;
                    }
                    if (config.lambda2 != 0.0) {
                        rh_s_rows.push_back(rat_fwd.pooled);
                        rh_t_rows.push_back(tape.constant(cached.pooled));
                    }
                }
            }

            nn::Var logits = tape.concat_rows(logit_rows);
            nn::Var l_task = tape.bce_with_logits_mean(logits, labels);
            nn::Var total = l_task;

            double inv_m = 1.0 / static_cast<double>(m);
            if (have_attention) {
                if (config.normalize_by_batch) l_attention = tape.scale(l_attention, inv_m);
                total = tape.add(total, tape.scale(l_attention, config.lambda1));
            }
            bool have_pooled = !rh_s_rows.empty();
            if (have_pooled) {
                nn::Var rh_s = tape.concat_rows(rh_s_rows);
                nn::Var rh_t = tape.concat_rows(rh_t_rows);
                nn::Var diff = tape.sub(rh_s, tape.matmul(rh_t, proj_w));
                l_pooled = tape.sum_all(tape.mul(diff, diff));
                if (config.normalize_by_batch) l_pooled = tape.scale(l_pooled, inv_m);
                total = tape.add(total, tape.scale(l_pooled, config.lambda2));
            }

            tape.backward(total);

            std::vector<nn::Mat> enc_grads;
            enc_grads.reserve(staged.size());
            for (auto var : staged) enc_grads.push_back(tape.grad(var));
            encoder_opt.step(enc_grads);

            std::vector<nn::Mat> cls_grads;
            cls_grads.push_back(tape.grad(span_scorer));
            cls_grads.push_back(tape.grad(w1));
            cls_grads.push_back(tape.grad(b1));
            cls_grads.push_back(tape.grad(w2));
            cls_grads.push_back(tape.grad(b2));
            if (train_w) cls_grads.push_back(tape.grad(proj_w));
            classifier_opt.step(cls_grads);

            KdStep step;
            step.epoch = epoch;
            step.step = global_step++;
            step.loss_task = tape.value(l_task)(0, 0);
            step.loss_attention = have_attention ? tape.value(l_attention)(0, 0) : 0.0;
            step.loss_pooled = have_pooled ? tape.value(l_pooled)(0, 0) : 0.0;
            step.loss_total = tape.value(total)(0, 0);
            result.log.push_back(step);
        }
    }

    result.scorer.model = std::move(student);
    result.scorer.head = std::move(head);
    return result;
}

double score_pair(const PairwiseScorer& scorer, const MentionPair& pair) {
    PairTokens toks = student_pair_tokens(scorer.model, pair);
    nn::Tape tape;
    auto staged = scorer.model.net.stage_params(tape);
    auto fwd = scorer.model.net.forward(tape, toks.ids, staged);
    nn::Var rep = pairwise_rep_var(tape, fwd.tokens, fwd.pooled, toks.trigger1, toks.trigger2,
                                   tape.constant(scorer.head.span_scorer));
    nn::Var logit = classifier_logit(tape, rep, tape.constant(scorer.head.w1),
                                     tape.constant(scorer.head.b1),
                                     tape.constant(scorer.head.w2),
                                     tape.constant(scorer.head.b2));
    double z = tape.value(logit)(0, 0);
    return 1.0 / (1.0 + std::exp(-z));
}

double pairwise_accuracy(const PairwiseScorer& scorer, const std::vector<MentionPair>& pairs) {
    if (pairs.empty()) throw ValidationError("pairwise_accuracy: no pairs");
    std::size_t correct = 0;
    for (const auto& p : pairs) {
        bool pred = score_pair(scorer, p) >= 0.5;
        if (pred == (p.label == 1)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

std::string kd_log_to_jsonl(const std::vector<KdStep>& log) {
    std::string out;
    for (const auto& s : log) {
        nlohmann::json j = {{"epoch", s.epoch},       {"step", s.step},
                            {"loss_task", s.loss_task}, {"loss_attention", s.loss_attention},
                            {"loss_pooled", s.loss_pooled}, {"loss_total", s.loss_total}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cdcr
