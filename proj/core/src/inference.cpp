#include "cdcr/inference.hpp"

#include <algorithm>

#include <json.hpp>

#include "cdcr/errors.hpp"

namespace cdcr {

using nlohmann::json;

AffinityGraph build_graph(const std::vector<Mention>& mentions,
                          const std::vector<MentionPair>& candidates,
                          const PairScorer& scorer) {
    AffinityGraph g;
    for (const auto& m : mentions) g.nodes.insert(m.mention_id);
    for (const auto& pair : candidates) {
        if (!g.nodes.count(pair.m1->mention_id) || !g.nodes.count(pair.m2->mention_id)) {
            throw ValidationError("build_graph: candidate endpoint not among mentions");
        }
        double score;
        try {
            score = scorer(pair);
        } catch (const std::exception& e) {
            throw Error("build_graph: scorer failed on pair " + pair.pair_id + ": " +
                        e.what());
        }
        g.edges[pair.pair_id] =
            AffinityGraph::Edge{pair.m1->mention_id, pair.m2->mention_id, score};
    }
    return g;
}

std::size_t ChainAssignment::num_chains() const {
    std::set<std::size_t> ids;
    for (const auto& [m, c] : chain_of) ids.insert(c);
    return ids.size();
}

std::map<std::size_t, std::set<std::string>> ChainAssignment::chains() const {
    std::map<std::size_t, std::set<std::string>> out;
    for (const auto& [m, c] : chain_of) out[c].insert(m);
    return out;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];  // path halving
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace

ChainAssignment connected_components(const AffinityGraph& graph, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ValidationError("connected_components: threshold must be in [0, 1]");
    }
    std::vector<std::string> ids(graph.nodes.begin(), graph.nodes.end());  // sorted
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;

    UnionFind uf(ids.size());
    for (const auto& [pair_id, edge] : graph.edges) {
        if (edge.score >= threshold) uf.unite(pos.at(edge.a), pos.at(edge.b));
    }

    // Components labeled by their smallest mention_id, then densely numbered
    // in that order. `ids` is sorted, so the first index seen per root is
    // the component minimum.
    std::map<std::size_t, std::size_t> root_to_chain;
    ChainAssignment out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::size_t root = uf.find(i);
        auto it = root_to_chain.find(root);
        if (it == root_to_chain.end()) {
            it = root_to_chain.emplace(root, root_to_chain.size()).first;
        }
        out.chain_of[ids[i]] = it->second;
    }
    return out;
}

ChainAssignment gold_chains(const CorpusSplit& split) {
    // Label clusters by smallest member id for the dense-id convention.
    std::vector<std::pair<std::string, const std::set<std::string>*>> by_min;
    for (const auto& [cluster_id, members] : split.clusters()) {
        by_min.emplace_back(*members.begin(), &members);
    }
    std::sort(by_min.begin(), by_min.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ChainAssignment out;
    for (std::size_t i = 0; i < by_min.size(); ++i) {
        for (const auto& m : *by_min[i].second) out.chain_of[m] = i;
    }
    return out;
}

std::string chains_to_jsonl(const ChainAssignment& assignment) {
    std::string out;
    for (const auto& [mention_id, chain_id] : assignment.chain_of) {
        json j = {{"mention_id", mention_id}, {"chain_id", chain_id}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

ChainAssignment chains_from_jsonl(const std::string& text) {
    ChainAssignment out;
    std::size_t line_no = 0;
    std::size_t at = 0;
    while (at < text.size()) {
        std::size_t nl = text.find('\n', at);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(at, nl - at);
        at = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("predictions line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string mention_id = j.at("mention_id").get<std::string>();
        if (out.chain_of.count(mention_id)) {
            throw ValidationError("predictions: duplicate mention_id " + mention_id);
        }
        out.chain_of[mention_id] = j.at("chain_id").get<std::size_t>();
    }
    return out;
}

}  // namespace cdcr
