#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "qfsum/pipeline.hpp"
#include "qfsum/qahead.hpp"
#include "qfsum/retrieval.hpp"
#include "qfsum/rouge.hpp"
#include "qfsum/synthetic.hpp"
#include "qfsum/vecspace.hpp"

namespace {

using namespace qfsum;

TokenList random_sentence(std::uint64_t& state, std::size_t len, std::size_t vocab) {
  TokenList out;
  for (std::size_t i = 0; i < len; ++i) {
    state = splitmix64(state);
    out.push_back("t" + std::to_string(state % vocab));
  }
  return out;
}

void BM_RougeSu4(benchmark::State& state) {
  std::uint64_t s = 1;
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto cand = random_sentence(s, len, 200);
  const auto ref = random_sentence(s, len, 200);
  for (auto _ : state) benchmark::DoNotOptimize(rouge_su4(cand, ref).f1);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeSu4)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_MakeLabels(benchmark::State& state) {
  const auto data = make_synthetic_dataset(SyntheticSpec{.questions = 1});
  for (auto _ : state) benchmark::DoNotOptimize(make_labels(data.front()));
}
BENCHMARK(BM_MakeLabels);

void BM_TfidfFit(benchmark::State& state) {
  std::uint64_t s = 2;
  std::vector<TokenList> docs;
  for (int i = 0; i < state.range(0); ++i) docs.push_back(random_sentence(s, 25, 2000));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tfidf(docs).vocabulary_size());
}
BENCHMARK(BM_TfidfFit)->Arg(100)->Arg(1000);

void BM_RetrieveDocuments(benchmark::State& state) {
  const auto examples = make_synthetic_dataset(SyntheticSpec{.questions = static_cast<std::size_t>(state.range(0))});
  const DocumentRetriever retriever(make_synthetic_corpus(examples));
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retriever.retrieve(examples[q].question, 10));
    q = (q + 1) % examples.size();
  }
}
BENCHMARK(BM_RetrieveDocuments)->Arg(200)->Arg(1000);

void BM_HashEmbed(benchmark::State& state) {
  const std::string text = "Orteronel inhibits androgen synthesis in prostate cancer patients treated with docetaxel";
  for (auto _ : state) benchmark::DoNotOptimize(hash_embed(text, static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_HashEmbed)->Arg(64)->Arg(768);

void BM_HeadForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = init_params(dim, 50, 1);
  const std::vector<double> x(dim + 1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x));
}
BENCHMARK(BM_HeadForward)->Arg(64)->Arg(768);

void BM_TrainEpoch(benchmark::State& state) {
  std::uint64_t s = 3;
  std::vector<LabeledInstance> data;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> e(64);
    for (double& v : e) {
      s = splitmix64(s);
      v = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    }
    data.push_back({build_feature(e, 1 + i % 20), static_cast<int>(s & 1)});
  }
  TrainConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg).b2);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_CrossValidate(benchmark::State& state) {
  const auto data = make_synthetic_dataset(SyntheticSpec{.questions = 100});
  CvConfig cv;
  cv.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(crossvalidate(data, cv, TrainConfig{}, AnswerConfig{}, PairEmbeddings{}).report.mean_f1);
  }
}
BENCHMARK(BM_CrossValidate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
