#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdcr/corpus.hpp"
#include "cdcr/encoding_types.hpp"
#include "cdcr/nn/mat.hpp"
#include "cdcr/nn/tape.hpp"
#include "cdcr/rng.hpp"

namespace cdcr {

// Encoder-side tokenization: <m> and </m> are atomic tokens, everything
// else goes through the word tokenizer.
std::vector<std::string> tokenize_with_markers(std::string_view text);

class Vocab {
public:
    static constexpr std::size_t kUnk = 0;
    static constexpr std::size_t kCls = 1;
    static constexpr std::size_t kSep = 2;
    static constexpr std::size_t kBos = 3;
    static constexpr std::size_t kEos = 4;
    static constexpr std::size_t kMarkOpen = 5;   // <m>
    static constexpr std::size_t kMarkClose = 6;  // </m>

    Vocab();  // specials only

    // Adds corpus tokens in first-appearance order (deterministic for a
    // fixed input order).
    static Vocab build(const std::vector<std::string>& texts);

    void add_tokens(const std::vector<std::string>& texts);

    std::size_t size() const { return tokens_.size(); }
    std::size_t id(const std::string& token) const;
    const std::string& token(std::size_t id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    static Vocab from_tokens(std::vector<std::string> tokens);

private:
    std::vector<std::string> tokens_;
    std::map<std::string, std::size_t> index_;
};

enum class Pooling { Cls, MeanTokens };

struct TinyTransformerConfig {
    std::size_t dim = 16;
    std::size_t heads = 2;
    std::size_t layers = 2;
    std::size_t max_len = 256;
    std::size_t ff_mult = 2;
    bool causal = false;
    Pooling pooling = Pooling::Cls;
    double ln_eps = 1e-5;
};

struct TransformerForward {
    nn::Var tokens;                  // T x D after the final layer norm
    nn::Var pooled;                  // 1 x D
    std::vector<nn::Var> attention;  // last-layer per-head attention, T x T
};

// Small bidirectional (or causal) self-attention encoder used as the
// reference student/teacher at desk scale. Parameters are plain matrices;
// each training step stages them onto a fresh tape.
class TinyTransformer {
public:
    TinyTransformer() = default;
    TinyTransformer(TinyTransformerConfig cfg, std::size_t vocab_size, Rng& rng);

    const TinyTransformerConfig& config() const { return cfg_; }
    std::size_t vocab_size() const { return vocab_size_; }

    std::vector<nn::Mat*> parameters();
    std::vector<const nn::Mat*> parameters() const;
    std::vector<std::string> parameter_names() const;

    // Copies every parameter onto the tape as an input var, aligned with
    // parameters().
    std::vector<nn::Var> stage_params(nn::Tape& tape) const;

    TransformerForward forward(nn::Tape& tape, const std::vector<std::size_t>& token_ids,
                               const std::vector<nn::Var>& staged) const;

private:
    TinyTransformerConfig cfg_;
    std::size_t vocab_size_ = 0;
    std::vector<nn::Mat> params_;
    std::vector<std::string> names_;

    struct LayerSlots;
    std::size_t slot(const std::string& name) const;
};

// Student model: vocab + bidirectional encoder with CLS pooling.
struct StudentModel {
    Vocab vocab;
    TinyTransformer net;
};

StudentModel make_student_model(const Vocab& vocab, std::size_t dim, std::size_t heads,
                                std::size_t layers, std::size_t max_len, std::uint64_t seed);

struct PairTokens {
    std::vector<std::size_t> ids;
    TokenSpan trigger1;  // token indices of the first trigger's words
    TokenSpan trigger2;
};

// <cls> marked1 <sep> marked2 [<sep> extra_text]. Throws when truncation to
// max_len would cut either trigger span; the tail may be dropped otherwise.
PairTokens student_pair_tokens(const StudentModel& model, const MentionPair& pair,
                               const std::optional<std::string>& extra_text = std::nullopt);

// <cls> tokens, tail-truncated to max_len. Throws on empty text.
std::vector<std::size_t> student_text_tokens(const StudentModel& model,
                                             const std::string& text);

PairEncoding encode_pair_student(const StudentModel& model, const MentionPair& pair);
StudentEncoding encode_text_student(const StudentModel& model, const std::string& text);

// Mass-preserving piecewise-linear resampling of a length-T profile to
// length K, as a T x K linear map (rows sum to 1).
nn::Mat attention_resample_matrix(std::size_t T, std::size_t K);

// Per head: mean over the query axis, resample the key profile to length
// K, renormalize to sum 1.
AttentionSummary summarize_attention(const std::vector<nn::Mat>& attention, std::size_t K);

// Same computation on the tape; returns a heads x K var.
nn::Var summarize_attention_var(nn::Tape& tape, const std::vector<nn::Var>& attention,
                                std::size_t K);

}  // namespace cdcr
