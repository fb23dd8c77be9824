#pragma once

#include <cstdint>
#include <string>

#include "cdcr/corpus.hpp"

namespace cdcr {

// Templated event corpus for desk-scale runs. Each cluster is one event
// (actor, action family, city, weekday); mentions vary the sentence
// template and the trigger lemma within the family. Action families are
// shared across clusters, so same-lemma cross-cluster pairs exist as hard
// negatives, and different-lemma within-cluster pairs as hard positives.
struct SyntheticConfig {
    std::size_t n_clusters = 10;       // non-singleton event clusters
    std::size_t min_cluster_size = 6;
    std::size_t max_cluster_size = 7;
    std::size_t n_singletons = 0;      // extra one-mention clusters
    // Action families in rotation (1..5). Fewer families mean more
    // same-lemma clusters, i.e. more distinct hard-negative combinations.
    std::size_t n_families = 5;
    std::uint64_t seed = 1;  // sentence realization (templates, sizes)
    // Event identities (actor/city/weekday assignments). Splits that share
    // an event_seed describe the same underlying events through different
    // sentences - the cross-document setting. 0 falls back to `seed`.
    std::uint64_t event_seed = 0;
    std::string split_name = "train";
};

CorpusSplit make_synthetic_split(const SyntheticConfig& config);

// JSONL in the corpus file schema, loadable by load_corpus.
std::string corpus_to_jsonl(const CorpusSplit& split);

}  // namespace cdcr
