// Serial reference vs OpenMP kernels for batched likelihoods and moments.
// Arguments: network edges, batch size.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spn/batch.hpp"
#include "spn/oracle.hpp"
#include "spn/scaling.hpp"

namespace {

struct Workload {
  spn::SpnGraph graph;
  std::vector<spn::Instance> instances;
};

Workload make_workload(std::size_t edges, std::size_t batch) {
  Workload w{spn::generate_network_with_edges(edges, 7), {}};
  std::mt19937_64 rng(11);
  w.instances.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) w.instances.push_back(spn::oracle::random_instance(w.graph, rng, 0.5));
  return w;
}

void log_likelihood(benchmark::State& state, spn::Execution execution) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(spn::batch_log_likelihood(w.graph, w.graph.weights(), w.instances, execution));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.counters["threads"] = execution == spn::Execution::Parallel ? spn::worker_threads() : 1;
}

void moments(benchmark::State& state, spn::Execution execution) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const spn::DirichletPrior prior = spn::uniform_prior(w.graph);
  for (auto _ : state)
    benchmark::DoNotOptimize(spn::batch_moments(w.graph, prior, w.instances, spn::MomentFunction::LogMoment, execution));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  state.counters["threads"] = execution == spn::Execution::Parallel ? spn::worker_threads() : 1;
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long edges : {1'000L, 10'000L})
    for (long batch : {64L, 512L}) b->Args({edges, batch});
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK_CAPTURE(log_likelihood, serial, spn::Execution::Serial)->Apply(sizes);
BENCHMARK_CAPTURE(log_likelihood, parallel, spn::Execution::Parallel)->Apply(sizes);
BENCHMARK_CAPTURE(moments, serial, spn::Execution::Serial)->Apply(sizes);
BENCHMARK_CAPTURE(moments, parallel, spn::Execution::Parallel)->Apply(sizes);

BENCHMARK_MAIN();
