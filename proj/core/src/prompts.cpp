#include "cdcr/prompts.hpp"

#include "cdcr/errors.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

namespace {

constexpr const char* kFtrSystem =
    "Think step by step. You are a coreference annotator and you have to explain a "
    "decision about two events marked with <m> and </m> tokens. You are given two "
    "sentences and the known decision. Reason step by step about the participants, "
    "times, entities, and locations of both events to justify the decision.";

constexpr const char* kLlamaZeroShotSystem =
    "Think step by step. You are a coreference annotator and you have to make a "
    "decision about two events marked with <m> and </m> tokens. You are given two "
    "sentences. Answer in one word if they are talking about different events or "
    "the same event.";

constexpr const char* kGptZeroShotSystem =
    "You are a coreference annotator and you have to make a decision about two "
    "events marked by <m> and </m> tokens. You are given two sentences. Answer in "
    "one word if they are talking about the same event: that is, if they are "
    "coreferent.";

std::array<std::string, 2> mark_both(const MentionPair& pair) {
    auto s1 = text::mark_trigger(pair.m1->sentence, pair.m1->trigger_start,
                                 pair.m1->trigger_end);
    auto s2 = text::mark_trigger(pair.m2->sentence, pair.m2->trigger_start,
                                 pair.m2->trigger_end);
    return {s1.text, s2.text};
}

}  // namespace

PromptBundle build_ftr_prompt(const MentionPair& pair) {
    PromptBundle b;
    b.pair_id = pair.pair_id;
    b.marked_sentences = mark_both(pair);
    b.system_text = kFtrSystem;
    const char* outcome = pair.label == 1 ? "the same event" : "different events";
    b.user_text = "Sentence 1 is: " + b.marked_sentences[0] +
                  ". Sentence 2 is: " + b.marked_sentences[1] +
                  ". It is known that the two marked events are talking about " + outcome +
                  ". Explain step by step why this is the case, reasoning about the "
                  "participants, times, entities, and locations involved. Your "
                  "explanation: ";
    return b;
}

PromptBundle build_zeroshot_prompt(const MentionPair& pair, ZeroShotStyle style) {
    PromptBundle b;
    b.pair_id = pair.pair_id;
    b.marked_sentences = mark_both(pair);
    switch (style) {
        case ZeroShotStyle::LlamaChat:
            b.system_text = kLlamaZeroShotSystem;
            b.user_text = "Sentence 1 is: " + b.marked_sentences[0] +
                          ". Sentence 2 is: " + b.marked_sentences[1] + ". Your answer: ";
            break;
        case ZeroShotStyle::GptChat:
            b.system_text = kGptZeroShotSystem;
            b.user_text = "sentence_1: " + b.marked_sentences[0] + "\n" +
                          "sentence_2: " + b.marked_sentences[1];
            break;
    }
    return b;
}

}  // namespace cdcr
