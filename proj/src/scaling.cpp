#include "spn/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spn/errors.hpp"
#include "spn/moments.hpp"
#include "spn/oracle.hpp"

namespace spn {

namespace {

oracle::RandomSpnParams bench_params(std::uint32_t num_vars, std::uint64_t seed) {
  oracle::RandomSpnParams p;
  p.seed = seed;
  p.num_vars = num_vars;
  p.depth = 3;
  p.sum_fanout = 2;
  p.product_fanout = 2;
  p.dag_merge_probability = 0.5;
  return p;
}

template <typename Query>
double median_seconds(Query&& query, const BenchOptions& options) {
  using clock = std::chrono::steady_clock;
  // Calibrate the inner loop so one repetition is long enough to time reliably.
  std::size_t inner = 1;
  for (;;) {
    auto t0 = clock::now();
    for (std::size_t i = 0; i < inner; ++i) query();
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    if (s >= options.min_repetition_seconds || inner >= (std::size_t{1} << 24)) break;
    inner *= 2;
  }
  std::vector<double> samples;
  for (int r = 0; r < std::max(1, options.repetitions); ++r) {
    auto t0 = clock::now();
    for (std::size_t i = 0; i < inner; ++i) query();
    samples.push_back(std::chrono::duration<double>(clock::now() - t0).count() / static_cast<double>(inner));
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

std::vector<std::size_t> geometric_sizes(const BenchOptions& o) {
  if (o.min_edges == 0 || o.max_edges < o.min_edges) throw DomainError("bench needs 0 < min-edges <= max-edges");
  const std::size_t steps = std::max<std::size_t>(o.steps, o.max_edges > o.min_edges ? 2 : 1);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    sizes.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(o.min_edges) * std::pow(static_cast<double>(o.max_edges) / o.min_edges, t))));
  }
  return sizes;
}

}  // namespace

SpnGraph generate_network_with_edges(std::size_t target_edges, std::uint64_t seed) {
  auto edges_for = [&](std::uint32_t vars) { return oracle::generate_random_spn(bench_params(vars, seed)).num_edges(); };
  std::uint32_t lo = 4;
  if (edges_for(lo) >= target_edges) return oracle::generate_random_spn(bench_params(lo, seed));
  std::uint32_t hi = lo;
  while (edges_for(hi) < target_edges) {
    lo = hi;
    hi *= 2;
    if (hi > (1u << 24)) throw DomainError("edge target too large");
  }
  while (hi - lo > 1) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    (edges_for(mid) >= target_edges ? hi : lo) = mid;
  }
  return oracle::generate_random_spn(bench_params(hi, seed));
}

BenchReport run_bench(const BenchOptions& options) {
  BenchReport report;
  std::mt19937_64 rng(options.seed);
  for (std::size_t target : geometric_sizes(options)) {
    const SpnGraph graph = generate_network_with_edges(target, options.seed);
    const DirichletPrior prior = uniform_prior(graph);
    const Instance x = oracle::random_instance(graph, rng);

    BenchRow row;
    row.target_edges = target;
    row.edges = graph.num_edges();
    row.nodes = graph.num_nodes();
    row.edge_visits = compute_moments(graph, prior, x, MomentFunction::Mean).counters.edge_visits;
    row.seconds_per_query = median_seconds([&] { (void)compute_moments(graph, prior, x, MomentFunction::Mean); }, options);
    row.ns_per_edge = row.seconds_per_query * 1e9 / static_cast<double>(row.edges);
    report.rows.push_back(row);

    if (options.naive && graph.num_edges() <= options.naive_max_edges) {
      BenchRow naive = row;
      naive.naive = true;
      PassCounters counters;
      (void)compute_lambdas_naive(graph, prior, x, &counters);
      naive.edge_visits = counters.edge_visits;
      BenchOptions once = options;
      once.min_repetition_seconds = 0.0;
      naive.seconds_per_query = median_seconds([&] { (void)compute_lambdas_naive(graph, prior, x); }, once);
      naive.ns_per_edge = naive.seconds_per_query * 1e9 / static_cast<double>(naive.edges);
      report.naive_rows.push_back(naive);
    }
  }

  double mx = 0, my = 0;
  for (const auto& r : report.rows) {
    mx += static_cast<double>(r.edges);
    my += r.seconds_per_query;
  }
  mx /= static_cast<double>(report.rows.size());
  my /= static_cast<double>(report.rows.size());
  double sxy = 0, sxx = 0;
  for (const auto& r : report.rows) {
    sxy += (static_cast<double>(r.edges) - mx) * (r.seconds_per_query - my);
    sxx += (static_cast<double>(r.edges) - mx) * (static_cast<double>(r.edges) - mx);
  }
  report.slope_ns_per_edge = sxx > 0 ? sxy / sxx * 1e9 : 0.0;
  auto [lo, hi] = std::minmax_element(report.rows.begin(), report.rows.end(),
                                      [](const BenchRow& a, const BenchRow& b) { return a.ns_per_edge < b.ns_per_edge; });
  report.time_per_edge_ratio = hi->ns_per_edge / lo->ns_per_edge;
  if (report.naive_rows.size() >= 2)
    report.naive_growth = report.naive_rows.back().seconds_per_query / report.naive_rows.front().seconds_per_query;
  return report;
}

}  // namespace spn
