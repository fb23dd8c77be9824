#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cdcr/nn/mat.hpp"

namespace cdcr {

// Half-open token index range.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const { return end - begin; }
};

// Student-side encoding: pooled classification vector, per-token vectors,
// and last-layer attention probabilities (one T x T matrix per head, rows
// summing to 1).
struct StudentEncoding {
    nn::Mat pooled;                    // 1 x D_S
    nn::Mat token_vectors;             // T x D_S
    std::vector<nn::Mat> attention;    // h matrices, each T x T
};

struct TeacherEncoding {
    nn::Mat pooled;                    // 1 x D_T (mean of last-layer token vectors)
    nn::Mat token_vectors;             // T x D_T
    std::vector<nn::Mat> attention;    // H matrices, each T x T
};

// Pair encodings carry the trigger token ranges of both mentions.
struct PairEncoding {
    StudentEncoding encoding;
    TokenSpan trigger1;
    TokenSpan trigger2;
};

// Fixed-length per-head attention key profiles; rows sum to 1.
struct AttentionSummary {
    nn::Mat per_head;                  // heads x K
};

}  // namespace cdcr
