#pragma once

#include <array>
#include <string>

#include "cdcr/corpus.hpp"

namespace cdcr {

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::string pair_id;
    std::array<std::string, 2> marked_sentences;  // triggers wrapped in <m>...</m>
};

enum class ZeroShotStyle { LlamaChat, GptChat };

// Rationale-generation prompt conditioned on the gold label. The user text
// embeds both marked sentences and states the gold outcome ("the same
// event" iff label = 1, "different events" otherwise); the system text asks
// for step-by-step reasoning grounded in participants, times, entities, and
// locations. The wording is fixed here so that generation runs are
// reproducible against one canonical template.
PromptBundle build_ftr_prompt(const MentionPair& pair);

// Label-free prompt for zero-shot coreference evaluation. The output is a
// pure function of the two sentences; the gold label never enters.
PromptBundle build_zeroshot_prompt(const MentionPair& pair, ZeroShotStyle style);

}  // namespace cdcr
