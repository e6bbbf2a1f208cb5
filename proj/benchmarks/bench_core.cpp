#include <benchmark/benchmark.h>

#include "topicreg/countreg.hpp"
#include "topicreg/lda.hpp"
#include "topicreg/log.hpp"
#include "topicreg/synth.hpp"

using namespace topicreg;

namespace {

DesignMatrix nb_design(std::size_t n) {
  DesignMatrix d;
  d.X = gen_gaussian_design(n, 4, 1);
  d.column_names = {"const", "x1", "x2", "x3", "x4"};
  Eigen::VectorXd beta(5);
  beta << 1.0, 0.5, -0.3, 0.2, 0.1;
  d.y = gen_counts(d.X, beta, 0.3, 2);
  return d;
}

void BM_NbLogPmf(benchmark::State& state) {
  double y = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nb_log_pmf(y, 3411.0, 0.26));
    y = y > 30000.0 ? 0.0 : y + 37.0;
  }
}
BENCHMARK(BM_NbLogPmf);

void BM_NbLoglik(benchmark::State& state) {
  const DesignMatrix d = nb_design(static_cast<std::size_t>(state.range(0)));
  const Eigen::VectorXd coef = Eigen::VectorXd::Constant(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nb_loglik(d, coef, -1.2));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NbLoglik)->Arg(2000)->Arg(20000);

void BM_NbScore(benchmark::State& state) {
  const DesignMatrix d = nb_design(static_cast<std::size_t>(state.range(0)));
  const Eigen::VectorXd coef = Eigen::VectorXd::Constant(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nb_score(d, coef, -1.2));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NbScore)->Arg(2000)->Arg(20000);

void BM_FitNb(benchmark::State& state) {
  const DesignMatrix d = nb_design(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_nb(d));
}
BENCHMARK(BM_FitNb)->Arg(2000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_GibbsSweeps(benchmark::State& state) {
  set_warning_sink([](std::string_view) {});
  SynthSpec spec;
  spec.num_docs = 2000;
  spec.doc_len = 10.0;
  const Corpus corpus = gen_corpus(spec).corpus;
  LdaConfig cfg;
  cfg.num_topics = static_cast<int>(state.range(0));
  cfg.alpha = 0.1;
  cfg.iters = 20;
  cfg.burnin = 10;
  for (auto _ : state) benchmark::DoNotOptimize(fit_lda(corpus, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.iters * static_cast<std::int64_t>(corpus.num_tokens()));
}
BENCHMARK(BM_GibbsSweeps)->Arg(4)->Arg(9)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
