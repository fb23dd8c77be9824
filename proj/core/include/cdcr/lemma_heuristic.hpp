#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cdcr/corpus.hpp"

namespace cdcr {

// Train-set cache of lemma-pair coreference statistics. Keys are canonically
// ordered (lemma_a <= lemma_b). Built from training labels only; dev/test
// labels must never reach it.
class LemmaPairCache {
public:
    struct Counts {
        std::uint64_t coreferent = 0;
        std::uint64_t total = 0;
    };

    using Key = std::pair<std::string, std::string>;

    static Key make_key(const std::string& a, const std::string& b) {
        return a <= b ? Key{a, b} : Key{b, a};
    }

    void add(const std::string& lemma_a, const std::string& lemma_b, bool coreferent);

    const std::map<Key, Counts>& counts() const { return counts_; }
    const std::string& built_from() const { return built_from_; }
    void set_built_from(std::string name) { built_from_ = std::move(name); }

    // coreferent/total for the pair's lemma key when present; 1.0 for equal
    // lemmas with no entry; 0.0 otherwise.
    double score(const std::string& lemma_a, const std::string& lemma_b) const;

    std::string to_json() const;
    static LemmaPairCache from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static LemmaPairCache load(const std::filesystem::path& path);

private:
    std::map<Key, Counts> counts_;
    std::string built_from_;
};

LemmaPairCache build_cache(const CorpusSplit& train_split);

double pair_score(const LemmaPairCache& cache, const MentionPair& pair);

// Pairs with pair_score >= threshold, in input order. Inclusive threshold:
// 0 is the identity filter.
std::vector<MentionPair> retrieve_candidates(const LemmaPairCache& cache,
                                             const std::vector<MentionPair>& pairs,
                                             double threshold);

}  // namespace cdcr
