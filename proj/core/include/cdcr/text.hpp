#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cdcr::text {

// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

// Byte offset of the scalar with index `scalar_index` (0-based). An index
// equal to utf8_length(s) maps to s.size(). Throws ValidationError when the
// index is past the end or the string is not valid UTF-8.
std::size_t utf8_byte_offset(std::string_view s, std::size_t scalar_index);

// Substring addressed in scalar offsets, half-open.
std::string utf8_substr(std::string_view s, std::size_t start, std::size_t end);

// Deterministic word tokenizer: splits on whitespace and breaks off
// punctuation as single-character tokens. Runs of letters/digits (and
// ' or _ inside a word) stay together; any non-ASCII scalar counts as a
// word character.
std::vector<std::string> word_tokenize(std::string_view s);

struct MarkedSentence {
    std::string text;          // sentence with <m>...</m> around the trigger
    std::string trigger_text;  // the span that was wrapped
};

// Wraps the scalar-offset span [start, end) in <m> / </m>. Rejects
// sentences that already contain either marker (never double-wraps) and
// spans that fall outside the sentence.
MarkedSentence mark_trigger(std::string_view sentence, std::size_t trigger_start,
                            std::size_t trigger_end);

}  // namespace cdcr::text
