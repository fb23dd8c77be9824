#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cdcr {

// One event mention: a trigger span inside a sentence plus its gold cluster.
// Trigger offsets are half-open and count Unicode scalar values.
struct Mention {
    std::string mention_id;
    std::string doc_id;
    std::optional<std::string> topic_id;
    std::string sentence;
    std::size_t trigger_start = 0;
    std::size_t trigger_end = 0;
    std::string trigger_lemma;
    std::string gold_cluster_id;
};

// Canonical pair id: smaller mention_id ++ "|" ++ larger.
std::string make_pair_id(const std::string& a, const std::string& b);

struct MentionPair {
    std::string pair_id;
    const Mention* m1 = nullptr;  // m1->mention_id < m2->mention_id
    const Mention* m2 = nullptr;
    int label = 0;  // 1 iff gold-coreferent
};

enum class PairScope { All, WithinTopic };

class CorpusSplit {
public:
    CorpusSplit() = default;
    CorpusSplit(std::string name, std::vector<Mention> mentions);

    const std::string& name() const { return name_; }
    const std::vector<Mention>& mentions() const { return mentions_; }
    const std::map<std::string, std::set<std::string>>& clusters() const { return clusters_; }

    const Mention& mention(const std::string& mention_id) const;
    bool has_mention(const std::string& mention_id) const;

    std::size_t size() const { return mentions_.size(); }

private:
    std::string name_;
    std::vector<Mention> mentions_;                         // file order
    std::map<std::string, std::size_t> index_;              // mention_id -> position
    std::map<std::string, std::set<std::string>> clusters_; // cluster_id -> mention ids

    void validate_and_index();
};

enum class CorpusFormat { Jsonl };

CorpusSplit load_corpus(const std::filesystem::path& path, CorpusFormat format,
                        const std::string& split_name = "");

// Constructs a pair in canonical order with the gold label.
MentionPair make_pair(const Mention& a, const Mention& b);

// All unordered distinct pairs in scope, canonically ordered per pair,
// enumerated in mention file order.
std::vector<MentionPair> enumerate_pairs(const CorpusSplit& split, PairScope scope);

// Exactly the label-1 subset of enumerate_pairs(split, All).
std::vector<MentionPair> positive_pairs(const CorpusSplit& split);

}  // namespace cdcr
