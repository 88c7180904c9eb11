#include <benchmark/benchmark.h>

#include "advml/corpus.hpp"
#include "advml/kernels.hpp"
#include "advml/nnet.hpp"
#include "advml/target.hpp"

using namespace advml;

namespace {

struct Fixture {
    SampleSet corpus = generate_corpus(20000, 200, 0.3, 1);
    Vocabulary vocab = build_vocabulary(corpus, 2000);
    TrainedNetwork net;
    TargetModel target = TargetModel::train(corpus, TargetKind::naive_bayes, 1);

    Fixture() {
        std::vector<LabeledFeatures> data;
        for (std::size_t i = 0; i < 500; ++i) data.push_back({featurize(corpus.samples[i].text, vocab), *corpus.samples[i].label});
        TrainingConfig c = full_data_profile();
        c.seed = 1;
        net = train(data, c);
    }

    std::span<const Sample> batch(std::int64_t n) const { return std::span<const Sample>(corpus.samples).first(n); }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_ScoreSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(score_samples_serial(f.net, f.vocab, f.batch(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(score_samples(f.net, f.vocab, f.batch(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ClassifySerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(classify_samples_serial(f.target, f.batch(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ClassifyParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(classify_samples(f.target, f.batch(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_ScoreSerial)->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(BM_ScoreParallel)->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(BM_ClassifySerial)->Arg(1000)->Arg(20000)->UseRealTime();
BENCHMARK(BM_ClassifyParallel)->Arg(1000)->Arg(20000)->UseRealTime();

BENCHMARK_MAIN();
