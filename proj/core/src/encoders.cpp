#include "cdcr/encoders.hpp"

#include <cmath>

#include "cdcr/errors.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

std::vector<std::string> tokenize_with_markers(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    auto flush = [&](std::size_t from, std::size_t to) {
        if (to > from) {
            for (auto& t : text::word_tokenize(text.substr(from, to - from))) {
                out.push_back(std::move(t));
            }
        }
    };
    while (pos < text.size()) {
        std::size_t open = text.find("<m>", pos);
        std::size_t close = text.find("</m>", pos);
        std::size_t next = std::min(open, close);
        if (next == std::string_view::npos) break;
        flush(pos, next);
        if (next == close) {
            out.emplace_back("</m>");
            pos = next + 4;
        } else {
            out.emplace_back("<m>");
            pos = next + 3;
        }
    }
    flush(pos, text.size());
    return out;
}

Vocab::Vocab() {
    tokens_ = {"<unk>", "<cls>", "<sep>", "<bos>", "<eos>", "<m>", "</m>"};
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
    Vocab v;
    v.add_tokens(texts);
    return v;
}

void Vocab::add_tokens(const std::vector<std::string>& texts) {
    for (const auto& t : texts) {
        for (auto& tok : tokenize_with_markers(t)) {
            if (index_.count(tok)) continue;
            index_[tok] = tokens_.size();
            tokens_.push_back(std::move(tok));
        }
    }
}

std::size_t Vocab::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    Vocab v;
    if (tokens.size() < v.tokens_.size()) throw ValidationError("vocab: missing special tokens");
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        if (tokens[i] != v.tokens_[i]) throw ValidationError("vocab: special tokens corrupted");
    }
    v.tokens_ = std::move(tokens);
    v.index_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_[v.tokens_[i]] = i;
    return v;
}

namespace {

constexpr const char* kLayerSlotNames[] = {"ln1_g", "ln1_b", "Wq", "bq", "Wk", "bk",
                                           "Wv",    "bv",    "Wo", "bo", "ln2_g",
                                           "ln2_b", "W1",    "b1", "W2", "b2"};
constexpr std::size_t kSlotsPerLayer = 16;

nn::Mat init_weight(std::size_t rows, std::size_t cols, Rng& rng) {
    // Scaled uniform with variance 1/fan_in.
    double a = std::sqrt(3.0 / static_cast<double>(rows));
    nn::Mat m(rows, cols);
    for (double& v : m.raw()) v = rng.uniform(-a, a);
    return m;
}

nn::Mat init_embed(std::size_t rows, std::size_t cols, Rng& rng) {
    nn::Mat m(rows, cols);
    for (double& v : m.raw()) v = 0.02 * rng.normal();
    return m;
}

}  // namespace

TinyTransformer::TinyTransformer(TinyTransformerConfig cfg, std::size_t vocab_size, Rng& rng)
    : cfg_(cfg), vocab_size_(vocab_size) {
    if (cfg_.dim % cfg_.heads != 0) {
        throw ValidationError("transformer: heads must divide dim");
    }
    std::size_t d = cfg_.dim;
    std::size_t ff = cfg_.dim * cfg_.ff_mult;

    auto push = [&](const std::string& name, nn::Mat m) {
        names_.push_back(name);
        params_.push_back(std::move(m));
    };

    push("tok_embed", init_embed(vocab_size, d, rng));
    push("pos_embed", init_embed(cfg_.max_len, d, rng));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        std::string prefix = "layer" + std::to_string(l) + ".";
        push(prefix + "ln1_g", nn::Mat(1, d, 1.0));
        push(prefix + "ln1_b", nn::Mat(1, d, 0.0));
        push(prefix + "Wq", init_weight(d, d, rng));
        push(prefix + "bq", nn::Mat(1, d, 0.0));
        push(prefix + "Wk", init_weight(d, d, rng));
        push(prefix + "bk", nn::Mat(1, d, 0.0));
        push(prefix + "Wv", init_weight(d, d, rng));
        push(prefix + "bv", nn::Mat(1, d, 0.0));
        push(prefix + "Wo", init_weight(d, d, rng));
        push(prefix + "bo", nn::Mat(1, d, 0.0));
        push(prefix + "ln2_g", nn::Mat(1, d, 1.0));
        push(prefix + "ln2_b", nn::Mat(1, d, 0.0));
        push(prefix + "W1", init_weight(d, ff, rng));
        push(prefix + "b1", nn::Mat(1, ff, 0.0));
        push(prefix + "W2", init_weight(ff, d, rng));
        push(prefix + "b2", nn::Mat(1, d, 0.0));
    }
    push("lnf_g", nn::Mat(1, d, 1.0));
    push("lnf_b", nn::Mat(1, d, 0.0));
}

std::vector<nn::Mat*> TinyTransformer::parameters() {
    std::vector<nn::Mat*> out;
    out.reserve(params_.size());
    for (auto& m : params_) out.push_back(&m);
    return out;
}

std::vector<const nn::Mat*> TinyTransformer::parameters() const {
    std::vector<const nn::Mat*> out;
    out.reserve(params_.size());
    for (const auto& m : params_) out.push_back(&m);
    return out;
}

std::vector<std::string> TinyTransformer::parameter_names() const { return names_; }

std::size_t TinyTransformer::slot(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    throw ValidationError("transformer: unknown parameter " + name);
}

std::vector<nn::Var> TinyTransformer::stage_params(nn::Tape& tape) const {
    std::vector<nn::Var> staged;
    staged.reserve(params_.size());
    for (const auto& m : params_) staged.push_back(tape.input(m));
    return staged;
}

TransformerForward TinyTransformer::forward(nn::Tape& tape,
                                            const std::vector<std::size_t>& token_ids,
                                            const std::vector<nn::Var>& staged) const {
    if (staged.size() != params_.size()) {
        throw ValidationError("transformer: staged parameter count mismatch");
    }
    if (token_ids.empty()) throw ValidationError("transformer: empty input");
    if (token_ids.size() > cfg_.max_len) {
        throw ValidationError("transformer: input exceeds max length");
    }
    for (std::size_t id : token_ids) {
        if (id >= vocab_size_) throw ValidationError("transformer: token id out of range");
    }
    std::size_t T = token_ids.size();
    std::size_t d = cfg_.dim;
    std::size_t dh = d / cfg_.heads;
    double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    auto P = [&](const std::string& name) { return staged[slot(name)]; };

    nn::Var x = tape.add(tape.gather_rows(P("tok_embed"), token_ids),
                         tape.slice_rows(P("pos_embed"), 0, T));

    nn::Mat mask;
    if (cfg_.causal && T > 1) {
        mask = nn::Mat(T, T, 0.0);
        for (std::size_t i = 0; i < T; ++i) {
            for (std::size_t j = i + 1; j < T; ++j) mask(i, j) = -1e9;
        }
    }

    std::vector<nn::Var> last_attention;
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        std::string pre = "layer" + std::to_string(l) + ".";
        nn::Var normed =
            tape.layer_norm_rows(x, P(pre + "ln1_g"), P(pre + "ln1_b"), cfg_.ln_eps);
        nn::Var q = tape.add_row_broadcast(tape.matmul(normed, P(pre + "Wq")), P(pre + "bq"));
        nn::Var k = tape.add_row_broadcast(tape.matmul(normed, P(pre + "Wk")), P(pre + "bk"));
        nn::Var v = tape.add_row_broadcast(tape.matmul(normed, P(pre + "Wv")), P(pre + "bv"));

        std::vector<nn::Var> head_outs;
        std::vector<nn::Var> head_attn;
        for (std::size_t h = 0; h < cfg_.heads; ++h) {
            nn::Var qh = tape.slice_cols(q, h * dh, (h + 1) * dh);
            nn::Var kh = tape.slice_cols(k, h * dh, (h + 1) * dh);
            nn::Var vh = tape.slice_cols(v, h * dh, (h + 1) * dh);
            nn::Var scores = tape.scale(tape.matmul(qh, tape.transpose(kh)), att_scale);
            if (cfg_.causal && T > 1) scores = tape.add(scores, tape.constant(mask));
            nn::Var probs = tape.softmax_rows(scores);
            head_attn.push_back(probs);
            head_outs.push_back(tape.matmul(probs, vh));
        }
        nn::Var attn_out = tape.add_row_broadcast(
            tape.matmul(tape.concat_cols(head_outs), P(pre + "Wo")), P(pre + "bo"));
        x = tape.add(x, attn_out);

        nn::Var normed2 =
            tape.layer_norm_rows(x, P(pre + "ln2_g"), P(pre + "ln2_b"), cfg_.ln_eps);
        nn::Var h1 = tape.relu(
            tape.add_row_broadcast(tape.matmul(normed2, P(pre + "W1")), P(pre + "b1")));
        nn::Var h2 = tape.add_row_broadcast(tape.matmul(h1, P(pre + "W2")), P(pre + "b2"));
        x = tape.add(x, h2);

        if (l + 1 == cfg_.layers) last_attention = std::move(head_attn);
    }

    nn::Var final_tokens = tape.layer_norm_rows(x, P("lnf_g"), P("lnf_b"), cfg_.ln_eps);
    nn::Var pooled = cfg_.pooling == Pooling::Cls ? tape.slice_rows(final_tokens, 0, 1)
                                                  : tape.mean_rows(final_tokens);

    return TransformerForward{final_tokens, pooled, std::move(last_attention)};
}

StudentModel make_student_model(const Vocab& vocab, std::size_t dim, std::size_t heads,
                                std::size_t layers, std::size_t max_len, std::uint64_t seed) {
    TinyTransformerConfig cfg;
    cfg.dim = dim;
    cfg.heads = heads;
    cfg.layers = layers;
    cfg.max_len = max_len;
    cfg.causal = false;
    cfg.pooling = Pooling::Cls;
    Rng rng(seed);
    return StudentModel{vocab, TinyTransformer(cfg, vocab.size(), rng)};
}

namespace {

// Appends the token ids of a marked sentence; the trigger span records the
// absolute indices of the tokens between <m> and </m>.
void append_marked(const Vocab& vocab, const std::string& marked,
                   std::vector<std::size_t>& ids, TokenSpan& span) {
    bool in_trigger = false;
    bool seen = false;
    for (const auto& tok : tokenize_with_markers(marked)) {
        if (tok == "<m>") {
            in_trigger = true;
            seen = true;
            ids.push_back(Vocab::kMarkOpen);
            span.begin = ids.size();
            continue;
        }
        if (tok == "</m>") {
            in_trigger = false;
            span.end = ids.size();
            ids.push_back(Vocab::kMarkClose);
            continue;
        }
        ids.push_back(vocab.id(tok));
    }
    if (!seen || in_trigger || span.end <= span.begin) {
        throw ValidationError("marked sentence without a well-formed trigger span");
    }
}

}  // namespace

PairTokens student_pair_tokens(const StudentModel& model, const MentionPair& pair,
                               const std::optional<std::string>& extra_text) {
    auto m1 = text::mark_trigger(pair.m1->sentence, pair.m1->trigger_start,
                                 pair.m1->trigger_end);
    auto m2 = text::mark_trigger(pair.m2->sentence, pair.m2->trigger_start,
                                 pair.m2->trigger_end);
    PairTokens out;
    out.ids.push_back(Vocab::kCls);
    append_marked(model.vocab, m1.text, out.ids, out.trigger1);
    out.ids.push_back(Vocab::kSep);
    append_marked(model.vocab, m2.text, out.ids, out.trigger2);
    if (extra_text && !extra_text->empty()) {
        out.ids.push_back(Vocab::kSep);
        for (const auto& tok : tokenize_with_markers(*extra_text)) {
            out.ids.push_back(model.vocab.id(tok));
        }
    }
    std::size_t max_len = model.net.config().max_len;
    if (out.ids.size() > max_len) {
        // Drop the tail only when both trigger spans (and their closing
        // markers) survive.
        if (out.trigger2.end + 1 > max_len) {
            throw ValidationError("pair " + pair.pair_id +
                                  " too long: truncation would cut a trigger span");
        }
        out.ids.resize(max_len);
    }
    return out;
}

std::vector<std::size_t> student_text_tokens(const StudentModel& model,
                                             const std::string& text) {
    if (text.empty()) throw ValidationError("cannot encode empty text");
    std::vector<std::size_t> ids;
    ids.push_back(Vocab::kCls);
    for (const auto& tok : tokenize_with_markers(text)) ids.push_back(model.vocab.id(tok));
    if (ids.size() < 2) throw ValidationError("cannot encode text with no tokens");
    std::size_t max_len = model.net.config().max_len;
    if (ids.size() > max_len) ids.resize(max_len);
    return ids;
}

namespace {

StudentEncoding run_student(const StudentModel& model, const std::vector<std::size_t>& ids) {
    nn::Tape tape;
    auto staged = model.net.stage_params(tape);
    auto fwd = model.net.forward(tape, ids, staged);
    StudentEncoding enc;
    enc.pooled = tape.value(fwd.pooled);
    enc.token_vectors = tape.value(fwd.tokens);
    for (auto a : fwd.attention) enc.attention.push_back(tape.value(a));
    return enc;
}

}  // namespace

PairEncoding encode_pair_student(const StudentModel& model, const MentionPair& pair) {
    PairTokens toks = student_pair_tokens(model, pair);
    PairEncoding out;
    out.encoding = run_student(model, toks.ids);
    out.trigger1 = toks.trigger1;
    out.trigger2 = toks.trigger2;
    return out;
}

StudentEncoding encode_text_student(const StudentModel& model, const std::string& text) {
    return run_student(model, student_text_tokens(model, text));
}

nn::Mat attention_resample_matrix(std::size_t T, std::size_t K) {
    if (T == 0 || K == 0) throw ValidationError("attention_resample_matrix: empty axis");
    // Work on a grid of T*K units so overlaps are exact integers: source
    // cell j covers [j*K, (j+1)*K), target cell k covers [k*T, (k+1)*T).
    nn::Mat R(T, K);
    for (std::size_t j = 0; j < T; ++j) {
        std::size_t s0 = j * K, s1 = (j + 1) * K;
        for (std::size_t k = 0; k < K; ++k) {
            std::size_t t0 = k * T, t1 = (k + 1) * T;
            std::size_t lo = std::max(s0, t0), hi = std::min(s1, t1);
            if (hi > lo) R(j, k) = static_cast<double>(hi - lo) / static_cast<double>(K);
        }
    }
    return R;
}

AttentionSummary summarize_attention(const std::vector<nn::Mat>& attention, std::size_t K) {
    if (attention.empty()) throw ValidationError("summarize_attention: no heads");
    if (K == 0) throw ValidationError("summarize_attention: K must be >= 1");
    std::size_t T = attention.front().rows();
    if (T == 0) throw ValidationError("summarize_attention: empty attention");
    nn::Mat R = attention_resample_matrix(T, K);
    AttentionSummary out;
    out.per_head = nn::Mat(attention.size(), K);
    for (std::size_t h = 0; h < attention.size(); ++h) {
        const nn::Mat& A = attention[h];
        if (A.rows() != T || A.cols() != T) {
            throw ValidationError("summarize_attention: head shape mismatch");
        }
        // Mean over the query axis gives the key profile.
        nn::Mat profile(1, T);
        for (std::size_t q = 0; q < T; ++q) {
            for (std::size_t k = 0; k < T; ++k) profile(0, k) += A(q, k);
        }
        double inv = 1.0 / static_cast<double>(T);
        for (double& v : profile.raw()) v *= inv;
        nn::Mat resampled = nn::matmul(profile, R);
        double sum = 0.0;
        for (double v : resampled.raw()) sum += v;
        if (sum <= 0.0) throw ValidationError("summarize_attention: nonpositive mass");
        for (std::size_t k = 0; k < K; ++k) out.per_head(h, k) = resampled(0, k) / sum;
    }
    return out;
}

nn::Var summarize_attention_var(nn::Tape& tape, const std::vector<nn::Var>& attention,
                                std::size_t K) {
    if (attention.empty()) throw ValidationError("summarize_attention_var: no heads");
    std::size_t T = tape.value(attention.front()).rows();
    nn::Var R = tape.constant(attention_resample_matrix(T, K));
    std::vector<nn::Var> rows;
    rows.reserve(attention.size());
    for (nn::Var head : attention) {
        nn::Var profile = tape.mean_rows(head);
        rows.push_back(tape.normalize_rows(tape.matmul(profile, R)));
    }
    return tape.concat_rows(rows);
}

}  // namespace cdcr
