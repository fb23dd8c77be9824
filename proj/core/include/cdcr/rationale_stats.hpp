#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cdcr {

struct CorpusStats {
    std::size_t n_pairs = 0;
    std::size_t total_tokens = 0;
    std::size_t unique_tokens = 0;
    double avg_token_length = 0.0;   // characters (Unicode scalars) per token
    double avg_tokens_per_ftr = 0.0;
    double self_bleu = 0.0;
};

// Token-level statistics under the deterministic word tokenizer; uniqueness
// is case-sensitive over surface forms. self_bleu is left at 0 here.
CorpusStats compute_stats(const std::vector<std::string>& texts);

// Corpus BLEU of one hypothesis against a set of references: clipped
// modified n-gram precisions with uniform weights over orders
// 1..min(max_ngram, |hyp|), standard brevity penalty (closest reference
// length, ties to the shorter). Zero overlap at any used order gives 0 —
// no smoothing.
double bleu_against(const std::vector<std::string>& hyp_tokens,
                    const std::vector<std::vector<std::string>>& ref_token_lists,
                    int max_ngram);

// Mean BLEU of each sampled text against all other sampled texts.
// Samples ceil(fraction * n) texts uniformly with the given seed.
double self_bleu(const std::vector<std::string>& texts, double sample_fraction,
                 std::uint64_t seed, int max_ngram = 4);

std::string render_stats_table(const CorpusStats& stats, const std::string& title);

}  // namespace cdcr
