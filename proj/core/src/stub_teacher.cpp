#include "cdcr/stub_teacher.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cdcr/errors.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

namespace {

constexpr const char* kOpeners = "Okay, let's do this.";

std::string extract_trigger(const std::string& marked) {
    auto open = marked.find("<m>");
    auto close = marked.find("</m>");
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw ValidationError("stub teacher: sentence without trigger markers");
    }
    return marked.substr(open + 3, close - open - 3);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool triggers_overlap(const std::string& t1, const std::string& t2) {
    auto a = text::word_tokenize(lower(t1));
    auto b = text::word_tokenize(lower(t2));
    for (const auto& x : a) {
        if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    }
    return false;
}

}  // namespace

StubTeacherClient::StubTeacherClient(Vocab vocab)
    : StubTeacherClient(std::move(vocab), Options{}) {}

StubTeacherClient::StubTeacherClient(Vocab vocab, Options opt)
    : vocab_(std::move(vocab)), opt_(opt) {
    TinyTransformerConfig cfg;
    cfg.dim = opt.dim;
    cfg.heads = opt.heads;
    cfg.layers = opt.layers;
    cfg.max_len = opt.max_len;
    cfg.causal = true;
    cfg.pooling = Pooling::MeanTokens;  // decoder-style teacher has no CLS token
    Rng rng(opt.seed);
    net_ = TinyTransformer(cfg, vocab_.size(), rng);
}

std::string StubTeacherClient::generate(const PromptBundle& prompt, const GenParams& params) {
    if (opt_.fail_pair_ids.count(prompt.pair_id)) {
        throw Error("stub teacher: simulated failure for pair " + prompt.pair_id);
    }
    bool is_ftr = prompt.user_text.find("It is known that") != std::string::npos;
    if (!is_ftr) {
        if (opt_.refuse_pair_ids.count(prompt.pair_id)) {
            return "I cannot help with that request.";
        }
        std::string t1 = extract_trigger(prompt.marked_sentences[0]);
        std::string t2 = extract_trigger(prompt.marked_sentences[1]);
        return triggers_overlap(t1, t2) ? "Yes." : "No.";
    }

    bool same = prompt.user_text.find("the same event") != std::string::npos;
    std::string t1 = extract_trigger(prompt.marked_sentences[0]);
    std::string t2 = extract_trigger(prompt.marked_sentences[1]);

    std::ostringstream out;
    out << kOpeners << " In the first sentence, the marked event is " << t1
        << " and the full context reads: " << prompt.marked_sentences[0]
        << " In the second sentence, the marked event is " << t2
        << " and the full context reads: " << prompt.marked_sentences[1]
        << " Step by step, I compare the participants, times, entities, and locations "
           "named in both sentences.";
    if (same) {
        out << " The participants, the location, and the time all line up, so the two "
               "mentions are talking about the same event.";
    } else {
        out << " The participants, the location, or the time fail to line up, so the two "
               "mentions are talking about different events.";
    }

    std::string text = out.str();
    auto tokens = tokenize(text);
    if (tokens.size() > static_cast<std::size_t>(params.max_tokens)) {
        std::string truncated;
        for (std::size_t i = 0; i < static_cast<std::size_t>(params.max_tokens); ++i) {
            if (i) truncated += ' ';
            truncated += tokens[i];
        }
        return truncated;
    }
    return text;
}

TeacherEncoding StubTeacherClient::encode(const std::string& text) {
    if (text.empty()) throw ValidationError("stub teacher: cannot encode empty text");
    std::vector<std::size_t> ids;
    ids.push_back(Vocab::kBos);
    for (const auto& tok : tokenize_with_markers(text)) ids.push_back(vocab_.id(tok));
    ids.push_back(Vocab::kEos);
    if (ids.size() > net_.config().max_len) ids.resize(net_.config().max_len);

    nn::Tape tape;
    auto staged = net_.stage_params(tape);
    auto fwd = net_.forward(tape, ids, staged);
    TeacherEncoding enc;
    enc.pooled = tape.value(fwd.pooled);
    enc.token_vectors = tape.value(fwd.tokens);
    for (auto a : fwd.attention) enc.attention.push_back(tape.value(a));
    return enc;
}

std::vector<std::string> StubTeacherClient::tokenize(const std::string& text) const {
    return tokenize_with_markers(text);
}

std::vector<std::string> StubTeacherClient::template_tokens() {
    static const std::string kTemplateText =
        std::string(kOpeners) +
        " In the first sentence, the marked event is and the full context reads: "
        "In the second sentence, Step by step, I compare the participants, times, "
        "entities, and locations named in both sentences. The participants, the "
        "location, and the time all line up, so the two mentions are talking about "
        "the same event. or fail to different events. Yes. No. I cannot help with "
        "that request.";
    return text::word_tokenize(kTemplateText);
}

Vocab build_stub_teacher_vocab(const CorpusSplit& split) {
    std::vector<std::string> texts;
    for (const auto& m : split.mentions()) {
        texts.push_back(text::mark_trigger(m.sentence, m.trigger_start, m.trigger_end).text);
    }
    std::string tmpl;
    for (const auto& tok : StubTeacherClient::template_tokens()) {
        tmpl += tok;
        tmpl += ' ';
    }
    texts.push_back(tmpl);
    return Vocab::build(texts);
}

}  // namespace cdcr
