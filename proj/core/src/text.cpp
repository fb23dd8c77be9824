#include "cdcr/text.hpp"

#include <cctype>

#include "cdcr/errors.hpp"

namespace cdcr::text {

namespace {

bool is_utf8_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Advances `i` past one scalar; returns false on malformed sequences.
bool advance_scalar(std::string_view s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    else return false;
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
        if (!is_utf8_continuation(static_cast<unsigned char>(s[i + k]))) return false;
    }
    i += len;
    return true;
}

}  // namespace

std::size_t utf8_length(std::string_view s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) {
        if (!advance_scalar(s, i)) throw ValidationError("invalid UTF-8 sequence");
        ++n;
    }
    return n;
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t scalar_index) {
    std::size_t i = 0, n = 0;
    while (n < scalar_index) {
        if (i >= s.size()) throw ValidationError("scalar index past end of string");
        if (!advance_scalar(s, i)) throw ValidationError("invalid UTF-8 sequence");
        ++n;
    }
    return i;
}

std::string utf8_substr(std::string_view s, std::size_t start, std::size_t end) {
    if (start > end) throw ValidationError("utf8_substr: start > end");
    std::size_t b0 = utf8_byte_offset(s, start);
    std::size_t b1 = utf8_byte_offset(s, end);
    return std::string(s.substr(b0, b1 - b0));
}

namespace {

bool is_word_char(unsigned char c) {
    if (c >= 0x80) return true;  // non-ASCII scalars stay inside words
    return std::isalnum(c) || c == '\'' || c == '_';
}

}  // namespace

std::vector<std::string> word_tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c < 0x80 && std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i;
            while (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) ++j;
            out.emplace_back(s.substr(i, j - i));
            i = j;
        } else {
            out.emplace_back(1, static_cast<char>(c));
            ++i;
        }
    }
    return out;
}

MarkedSentence mark_trigger(std::string_view sentence, std::size_t trigger_start,
                            std::size_t trigger_end) {
    if (sentence.find("<m>") != std::string_view::npos ||
        sentence.find("</m>") != std::string_view::npos) {
        throw ValidationError("sentence already contains trigger markers");
    }
    std::size_t n = utf8_length(sentence);
    if (!(trigger_start < trigger_end && trigger_end <= n)) {
        throw ValidationError("trigger span out of range");
    }
    std::size_t b0 = utf8_byte_offset(sentence, trigger_start);
    std::size_t b1 = utf8_byte_offset(sentence, trigger_end);
    MarkedSentence m;
    m.trigger_text = std::string(sentence.substr(b0, b1 - b0));
    m.text.reserve(sentence.size() + 7);
    m.text.append(sentence.substr(0, b0));
    m.text.append("<m>");
    m.text.append(m.trigger_text);
    m.text.append("</m>");
    m.text.append(sentence.substr(b1));
    return m;
}

}  // namespace cdcr::text
