#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdcr/corpus.hpp"

namespace cdcr {

struct AffinityGraph {
    struct Edge {
        std::string a, b;  // a < b
        double score = 0.0;
    };
    std::set<std::string> nodes;            // every mention, isolated or not
    std::map<std::string, Edge> edges;      // canonical pair_id -> edge
};

using PairScorer = std::function<double(const MentionPair&)>;

// Scores every candidate pair; all mentions become nodes so singletons stay
// representable.
AffinityGraph build_graph(const std::vector<Mention>& mentions,
                          const std::vector<MentionPair>& candidates,
                          const PairScorer& scorer);

struct ChainAssignment {
    std::map<std::string, std::size_t> chain_of;  // mention_id -> dense chain id

    std::size_t num_chains() const;
    // chain id -> member mention ids
    std::map<std::size_t, std::set<std::string>> chains() const;
};

// Connected components of the subgraph keeping edges with score >=
// threshold. Chain ids are dense integers ordered by each component's
// smallest mention_id.
ChainAssignment connected_components(const AffinityGraph& graph, double threshold = 0.5);

// Gold chains of a split, with the same dense-id labeling convention.
ChainAssignment gold_chains(const CorpusSplit& split);

std::string chains_to_jsonl(const ChainAssignment& assignment);
ChainAssignment chains_from_jsonl(const std::string& text);

}  // namespace cdcr
