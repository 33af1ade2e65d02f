#include <benchmark/benchmark.h>

#include "whatsnet/centrality.hpp"
#include "whatsnet/encoding.hpp"
#include "whatsnet/features.hpp"
#include "whatsnet/model.hpp"
#include "whatsnet/rank.hpp"

namespace {

using namespace whatsnet;

// Synthetic instance with roughly `incidences` memberships.
std::pair<Hypergraph, EdgeDependentLabels> instance(std::int64_t incidences) {
  SyntheticOptions o;
  o.num_edges = static_cast<std::size_t>(incidences) * 2 / 11;
  o.num_nodes = static_cast<std::size_t>(incidences) / 10;
  return generate_synthetic(o);
}

void BM_Centralities(benchmark::State& state) {
  const auto [h, labels] = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_all(h));
  state.SetComplexityN(static_cast<std::int64_t>(h.total_size()));
}
BENCHMARK(BM_Centralities)->RangeMultiplier(2)->Range(5000, 40000)->Complexity();

void BM_PositionalEncoding(benchmark::State& state) {
  const auto [h, labels] = instance(state.range(0));
  const CentralityMatrix f = compute_all(h);
  for (auto _ : state) benchmark::DoNotOptimize(batch_pe(h, f));
  state.SetComplexityN(static_cast<std::int64_t>(h.total_size()));
}
BENCHMARK(BM_PositionalEncoding)->RangeMultiplier(2)->Range(5000, 40000)->Complexity();

void BM_ForwardEval(benchmark::State& state) {
  const auto [h, labels] = instance(state.range(0));
  const FeatureMatrix x = random_features(h.num_nodes(), 64, 0);
  const PositionalEncodingTable pe = batch_pe(h, compute_all(h));
  WhatsNetConfig c;
  c.final_dim = 64;
  const WhatsNet model(c, 0);
  for (auto _ : state) benchmark::DoNotOptimize(model.embed({h, x.values, pe}, 0));
  state.SetComplexityN(static_cast<std::int64_t>(h.total_size()));
}
BENCHMARK(BM_ForwardEval)->RangeMultiplier(2)->Range(5000, 20000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Stationary(benchmark::State& state) {
  const auto [h, labels] = instance(state.range(0));
  const auto w = labels_to_weights(h, labels.pair_labels(), {{0, 1.0}, {1, 2.0}, {2, 3.0}});
  for (auto _ : state) benchmark::DoNotOptimize(stationary(h, w, {0.15}));
  state.SetComplexityN(static_cast<std::int64_t>(h.total_size()));
}
BENCHMARK(BM_Stationary)->RangeMultiplier(2)->Range(5000, 40000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
