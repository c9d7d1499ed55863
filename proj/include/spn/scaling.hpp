#pragma once

#include <cstdint>
#include <vector>

#include "spn/graph.hpp"

namespace spn {

/// Wall-clock scaling of the all-edges moment query, and of the per-edge naive route.
struct BenchOptions {
  std::size_t min_edges = 1000;
  std::size_t max_edges = 100000;
  std::size_t steps = 5;
  std::uint64_t seed = 1;
  bool naive = false;
  std::size_t naive_max_edges = 16000;  // the quadratic route is skipped above this
  int repetitions = 5;
  double min_repetition_seconds = 0.02;
};

struct BenchRow {
  std::size_t target_edges = 0;
  std::size_t edges = 0;
  std::size_t nodes = 0;
  double seconds_per_query = 0.0;  // median over repetitions
  double ns_per_edge = 0.0;
  std::uint64_t edge_visits = 0;   // per query
  bool naive = false;
};

struct BenchReport {
  std::vector<BenchRow> rows;        // linear route, strictly increasing sizes
  std::vector<BenchRow> naive_rows;  // empty unless options.naive
  double slope_ns_per_edge = 0.0;    // least-squares slope of time vs edges
  double time_per_edge_ratio = 0.0;  // max / min over rows
  double naive_growth = 0.0;         // time(largest naive) / time(smallest naive)
};

/// Random network from the scope-partition generator with at least `target_edges` edges
/// (the smallest variable count reaching the target). Deterministic per seed.
SpnGraph generate_network_with_edges(std::size_t target_edges, std::uint64_t seed);

/// Geometric size sweep; timing covers the two circuit passes and the per-edge combination only.
BenchReport run_bench(const BenchOptions& options);

}  // namespace spn
