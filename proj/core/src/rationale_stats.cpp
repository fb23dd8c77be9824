#include "cdcr/rationale_stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cdcr/errors.hpp"
#include "cdcr/rng.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

CorpusStats compute_stats(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("compute_stats: no texts");
    CorpusStats s;
    s.n_pairs = texts.size();
    std::set<std::string> vocab;
    std::size_t total_chars = 0;
    for (const auto& t : texts) {
        for (auto& tok : text::word_tokenize(t)) {
            s.total_tokens += 1;
            total_chars += text::utf8_length(tok);
            vocab.insert(std::move(tok));
        }
    }
    s.unique_tokens = vocab.size();
    s.avg_token_length =
        s.total_tokens ? static_cast<double>(total_chars) / static_cast<double>(s.total_tokens)
                       : 0.0;
    s.avg_tokens_per_ftr = static_cast<double>(s.total_tokens) / static_cast<double>(s.n_pairs);
    return s;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, int n) {
    std::map<Ngram, std::size_t> counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        Ngram g(tokens.begin() + i, tokens.begin() + i + n);
        counts[std::move(g)] += 1;
    }
    return counts;
}

}  // namespace

double bleu_against(const std::vector<std::string>& hyp_tokens,
                    const std::vector<std::vector<std::string>>& ref_token_lists,
                    int max_ngram) {
    if (ref_token_lists.empty()) throw ValidationError("bleu_against: no references");
    if (hyp_tokens.empty()) return 0.0;

    // Effective order: short hypotheses are scored over the orders they
    // actually have n-grams for.
    int top = std::min<int>(max_ngram, static_cast<int>(hyp_tokens.size()));

    double log_prec_sum = 0.0;
    for (int n = 1; n <= top; ++n) {
        auto hyp_counts = count_ngrams(hyp_tokens, n);
        std::map<Ngram, std::size_t> max_ref;
        for (const auto& ref : ref_token_lists) {
            for (auto& [g, c] : count_ngrams(ref, n)) {
                auto it = max_ref.find(g);
                if (it == max_ref.end()) {
                    max_ref.emplace(g, c);
                } else {
                    it->second = std::max(it->second, c);
                }
            }
        }
        std::size_t clipped = 0, total = 0;
        for (const auto& [g, c] : hyp_counts) {
            total += c;
            auto it = max_ref.find(g);
            if (it != max_ref.end()) clipped += std::min(c, it->second);
        }
        if (clipped == 0) return 0.0;
        log_prec_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }

    // Closest reference length, ties broken toward the shorter.
    std::size_t c = hyp_tokens.size();
    std::size_t r = ref_token_lists.front().size();
    for (const auto& ref : ref_token_lists) {
        std::size_t len = ref.size();
        auto diff = [&](std::size_t l) {
            return l > c ? l - c : c - l;
        };
        if (diff(len) < diff(r) || (diff(len) == diff(r) && len < r)) r = len;
    }
    double bp = c >= r ? 1.0
                       : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_prec_sum / top);
}

double self_bleu(const std::vector<std::string>& texts, double sample_fraction,
                 std::uint64_t seed, int max_ngram) {
    if (sample_fraction <= 0.0 || sample_fraction > 1.0) {
        throw ValidationError("self_bleu: sample_fraction must be in (0, 1]");
    }
    std::size_t k = static_cast<std::size_t>(
        std::ceil(sample_fraction * static_cast<double>(texts.size())));
    if (k < 2) throw ValidationError("self_bleu: sample smaller than 2 texts");

    Rng rng(seed);
    auto idx = rng.sample_indices(texts.size(), k);
    std::sort(idx.begin(), idx.end());  // stable hypothesis order

    std::vector<std::vector<std::string>> sampled;
    sampled.reserve(k);
    for (std::size_t i : idx) sampled.push_back(text::word_tokenize(texts[i]));

    double sum = 0.0;
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        std::vector<std::vector<std::string>> refs;
        refs.reserve(sampled.size() - 1);
        for (std::size_t j = 0; j < sampled.size(); ++j) {
            if (j != i) refs.push_back(sampled[j]);
        }
        sum += bleu_against(sampled[i], refs, max_ngram);
    }
    return sum / static_cast<double>(sampled.size());
}

std::string render_stats_table(const CorpusStats& stats, const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    out << "  # Event Pairs     " << stats.n_pairs << "\n";
    out << "  # Total Tokens    " << stats.total_tokens << "\n";
    out << "  # Unique Tokens   " << stats.unique_tokens << "\n";
    out << "  Avg. Token Length " << stats.avg_token_length << "\n";
    out << "  Avg. Tokens/FTR   " << stats.avg_tokens_per_ftr << "\n";
    out << "  Self-BLEU         " << stats.self_bleu << "\n";
    return out.str();
}

}  // namespace cdcr
