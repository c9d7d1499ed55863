#include "spn/batch.hpp"

#include <exception>

#include "spn/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spn {

int worker_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<LogReal> batch_log_likelihood(const SpnGraph& graph, std::span<const double> weights,
                                          std::span<const Instance> instances, Execution execution) {
  std::vector<LogReal> out(instances.size());
  if (execution == Execution::Serial) {
    for (std::size_t i = 0; i < instances.size(); ++i) out[i] = log_likelihood(graph, weights, instances[i]);
    return out;
  }

  const LogReal norm = evaluate(graph, weights, Instance::all_missing(graph.num_vars())).root_value(graph);
  for (const Instance& x : instances)
    if (x.size() != graph.num_vars()) throw StructureError("instance does not match the graph's variable count");
  graph.topo_order();

  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const LogReal joint = evaluate(graph, weights, instances[i]).root_value(graph);
    out[i] = joint.zero ? joint : LogReal::from_log(joint.log - norm.log);
  }
  return out;
}

std::vector<std::optional<EdgeMomentReport>> batch_moments(const SpnGraph& graph, const DirichletPrior& prior,
                                                           std::span<const Instance> instances, MomentFunction f,
                                                           Execution execution) {
  std::vector<std::optional<EdgeMomentReport>> out(instances.size());
  if (execution == Execution::Serial) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      try {
        out[i] = compute_moments(graph, prior, instances[i], f);
      } catch (const ZeroEvidenceError&) {
      }
    }
    return out;
  }

  check_prior(graph, prior);
  for (const Instance& x : instances)
    if (x.size() != graph.num_vars()) throw StructureError("instance does not match the graph's variable count");
  graph.topo_order();

  // Exceptions may not cross the parallel region; anything other than zero evidence is
  // captured and rethrown afterwards.
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = compute_moments(graph, prior, instances[i], f);
    } catch (const ZeroEvidenceError&) {
    } catch (...) {
#pragma omp critical(spn_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace spn
