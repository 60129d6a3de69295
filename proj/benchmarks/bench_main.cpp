#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "synth.hpp"
#include "threadrank/pipeline.hpp"

using namespace threadrank;

namespace {

SearchEngine const &engine(std::size_t threads)
{
    static std::map<std::size_t, std::unique_ptr<SearchEngine>> cache;
    auto &slot = cache[threads];
    if (!slot) slot = std::make_unique<SearchEngine>(synth::engine_data(synth::funnel_corpus(7, threads, 5)));
    return *slot;
}

void bm25_search(benchmark::State &state)
{
    auto const &e = engine(static_cast<std::size_t>(state.range(0)));
    auto const query = e.data().preprocessor.query_bag(synth::funnel_corpus(7, 10, 5).queries[0].text);
    for (auto _ : state) {
        benchmark::DoNotOptimize(e.data().thread_index.search(query, 500));
    }
}
BENCHMARK(bm25_search)->Arg(720)->Arg(3000);

void asym_score_pair(benchmark::State &state)
{
    auto const &e = engine(720);
    auto const &store = e.data().store;
    auto const &idf = e.data().idf;
    auto const vocab = synth::words(0, 40);
    WordSet const q(vocab.begin(), vocab.begin() + 5);
    WordSet const t(vocab.begin() + 3, vocab.begin() + 3 + state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(asym_score(q, t, store, idf));
    }
}
BENCHMARK(asym_score_pair)->Arg(10)->Arg(35);

void end_to_end_search(benchmark::State &state)
{
    auto const &e = engine(static_cast<std::size_t>(state.range(0)));
    auto const cfg = configure_ablation("CRAR");
    auto const text = synth::funnel_corpus(7, 10, 5).queries[0].text;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e.search(text, cfg));
    }
}
BENCHMARK(end_to_end_search)->Arg(720)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
