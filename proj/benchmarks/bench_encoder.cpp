#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "cdcr/encoders.hpp"
#include "cdcr/synthetic.hpp"
#include "cdcr/text.hpp"

namespace {

cdcr::StudentModel bench_student() {
    cdcr::SyntheticConfig sc;
    sc.seed = 4;
    cdcr::CorpusSplit split = cdcr::make_synthetic_split(sc);
    std::vector<std::string> texts;
    for (const auto& m : split.mentions()) {
        texts.push_back(
            cdcr::text::mark_trigger(m.sentence, m.trigger_start, m.trigger_end).text);
    }
    return cdcr::make_student_model(cdcr::Vocab::build(texts), 16, 2, 2, 256, 4);
}

void BM_StudentEncodeText(benchmark::State& state) {
    cdcr::StudentModel model = bench_student();
    std::string text =
        "Witnesses said Alvarez shot a guard near Dresden on Friday evening . Reports from "
        "Dresden say Alvarez wounded a guard this Friday .";
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::encode_text_student(model, text));
    }
}
BENCHMARK(BM_StudentEncodeText);

void BM_SummarizeAttention(benchmark::State& state) {
    std::size_t T = static_cast<std::size_t>(state.range(0));
    std::vector<cdcr::nn::Mat> attention(4, cdcr::nn::Mat(T, T, 1.0 / double(T)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdcr::summarize_attention(attention, 128));
    }
}
BENCHMARK(BM_SummarizeAttention)->Arg(32)->Arg(128);

}  // namespace
