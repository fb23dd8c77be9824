#include "benchmark/benchmark.h"
#include "cdcr/inference.hpp"
#include "cdcr/metrics.hpp"
#include "cdcr/rng.hpp"

namespace {

cdcr::ChainAssignment random_partition(cdcr::Rng& rng, std::size_t n,
                                       std::size_t max_chains) {
    cdcr::ChainAssignment out;
    for (std::size_t i = 0; i < n; ++i) {
        out.chain_of["m" + std::to_string(i)] = rng.next_below(max_chains);
    }
    return out;
}

void BM_BCubed(benchmark::State& state) {
    cdcr::Rng rng(1);
    std::size_t n = static_cast<std::size_t>(state.range(0));
    auto key = random_partition(rng, n, n / 4 + 1);
    auto resp = random_partition(rng, n, n / 4 + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::b_cubed(key, resp));
    }
}
BENCHMARK(BM_BCubed)->Arg(100)->Arg(400);

void BM_CeafE(benchmark::State& state) {
    cdcr::Rng rng(2);
    std::size_t n = static_cast<std::size_t>(state.range(0));
    auto key = random_partition(rng, n, n / 4 + 1);
    auto resp = random_partition(rng, n, n / 4 + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::ceaf_e(key, resp));
    }
}
BENCHMARK(BM_CeafE)->Arg(100)->Arg(400);

void BM_Muc(benchmark::State& state) {
    cdcr::Rng rng(3);
    std::size_t n = static_cast<std::size_t>(state.range(0));
    auto key = random_partition(rng, n, n / 4 + 1);
    auto resp = random_partition(rng, n, n / 4 + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::muc(key, resp));
    }
}
BENCHMARK(BM_Muc)->Arg(100)->Arg(400);

}  // namespace
