#pragma once

#include <map>
#include <string>
#include <vector>

#include "cdcr/inference.hpp"

namespace cdcr {

struct PRF {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

PRF make_prf(double recall, double precision);

struct ScoreReport {
    PRF muc;
    PRF b3;
    PRF ceaf_e;
    double conll_f1 = 0.0;
    // Zero-link sides score 0 by convention; flagged so reports can say so.
    bool muc_degenerate_key = false;
    bool muc_degenerate_response = false;
};

// Link-based MUC over a shared mention universe.
PRF muc(const ChainAssignment& key, const ChainAssignment& response);

// Per-mention B-cubed, averaged uniformly over mentions.
PRF b_cubed(const ChainAssignment& key, const ChainAssignment& response);

// Entity-alignment CEAF with phi4 similarity and optimal one-to-one chain
// matching (maximum-weight bipartite matching).
PRF ceaf_e(const ChainAssignment& key, const ChainAssignment& response);

// All three metrics plus their F1 mean.
ScoreReport conll(const ChainAssignment& key, const ChainAssignment& response);

std::string render_score_report(const ScoreReport& report);

// Maximum total weight of a one-to-one assignment between rows and columns
// of `weight` (not all rows/cols need matching). Exposed for the CEAF
// oracle tests.
double max_weight_matching(const std::vector<std::vector<double>>& weight);

struct SystemComparison {
    std::size_t pos_a_only = 0;  // gold-positive pairs A got right and B wrong
    std::size_t pos_b_only = 0;
    std::size_t neg_a_only = 0;
    std::size_t neg_b_only = 0;
    std::size_t total_pos = 0;
    std::size_t total_neg = 0;
};

// Binary decisions keyed by pair_id; both maps must cover every gold pair.
SystemComparison compare_systems(const std::vector<std::pair<std::string, int>>& gold_pairs,
                                 const std::map<std::string, int>& decisions_a,
                                 const std::map<std::string, int>& decisions_b);

struct ClusterSizeProfile {
    std::map<std::size_t, std::size_t> correct_by_size;  // gold cluster size -> count
    std::map<std::size_t, std::size_t> total_by_size;
};

// A mention is correctly resolved when the gold cluster with maximal
// overlap with its predicted chain (ties: larger overlap ratio, then
// smaller cluster id) is its own gold cluster.
ClusterSizeProfile cluster_size_profile(const ChainAssignment& key,
                                        const ChainAssignment& response);

}  // namespace cdcr
