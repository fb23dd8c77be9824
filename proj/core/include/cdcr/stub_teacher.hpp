#pragma once

#include <set>
#include <string>
#include <vector>

#include "cdcr/encoders.hpp"
#include "cdcr/rationales.hpp"

namespace cdcr {

// Deterministic teacher for tests and desk-scale runs: templated rationale
// text plus a small causal encoder (D_T = 32, H = 4 by default) for the
// teacher-state paths. Generation is a pure function of the prompt.
class StubTeacherClient : public TeacherClient {
public:
    struct Options {
        std::size_t dim = 32;
        std::size_t heads = 4;
        std::size_t layers = 2;
        std::size_t max_len = 256;
        std::uint64_t seed = 20240601;
        std::set<std::string> fail_pair_ids;    // generate() throws for these
        std::set<std::string> refuse_pair_ids;  // generate() returns a refusal
    };

    explicit StubTeacherClient(Vocab vocab);
    StubTeacherClient(Vocab vocab, Options opt);

    std::string name() const override { return "stub-teacher"; }
    std::size_t hidden_dim() const override { return net_.config().dim; }
    std::size_t head_count() const override { return net_.config().heads; }

    std::string generate(const PromptBundle& prompt, const GenParams& params) override;
    TeacherEncoding encode(const std::string& text) override;
    std::vector<std::string> tokenize(const std::string& text) const override;

    const TinyTransformer& net() const { return net_; }
    const Vocab& vocab() const { return vocab_; }

    // Fixed wording used by the rationale template, so callers can fold it
    // into the teacher vocabulary.
    static std::vector<std::string> template_tokens();

private:
    Vocab vocab_;
    Options opt_;
    TinyTransformer net_;
};

// Teacher vocabulary over the split's marked sentences plus the stub's
// template wording.
Vocab build_stub_teacher_vocab(const CorpusSplit& split);

}  // namespace cdcr
