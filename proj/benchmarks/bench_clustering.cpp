#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "cdcr/inference.hpp"
#include "cdcr/lemma_heuristic.hpp"
#include "cdcr/rng.hpp"
#include "cdcr/synthetic.hpp"

namespace {

void BM_ConnectedComponents(benchmark::State& state) {
    cdcr::Rng rng(5);
    std::size_t n = static_cast<std::size_t>(state.range(0));
    cdcr::AffinityGraph g;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("m" + std::to_string(i));
        g.nodes.insert(ids.back());
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.next_double() < 0.05) {
                g.edges[ids[i] + "|" + ids[j]] =
                    cdcr::AffinityGraph::Edge{ids[i], ids[j], rng.next_double()};
            }
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::connected_components(g, 0.5));
    }
}
BENCHMARK(BM_ConnectedComponents)->Arg(200)->Arg(1000);

void BM_HeuristicRetrieval(benchmark::State& state) {
    cdcr::SyntheticConfig sc;
    sc.n_clusters = 10;
    sc.min_cluster_size = 8;
    sc.max_cluster_size = 9;
    sc.seed = 6;
    cdcr::CorpusSplit split = cdcr::make_synthetic_split(sc);
    cdcr::LemmaPairCache cache = cdcr::build_cache(split);
    auto pairs = cdcr::enumerate_pairs(split, cdcr::PairScope::All);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::retrieve_candidates(cache, pairs, 0.05));
    }
}
BENCHMARK(BM_HeuristicRetrieval);

}  // namespace
