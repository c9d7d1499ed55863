#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spn/graph.hpp"
#include "spn/inference.hpp"
#include "spn/moments.hpp"

namespace spn {

// Instances are independent, so batched queries fan out across OpenMP threads. The
// serial variants call the single-instance API in a plain loop and are kept as the
// reference the parallel kernels are tested against. Output order always follows input.

enum class Execution { Serial, Parallel };

std::vector<LogReal> batch_log_likelihood(const SpnGraph& graph, std::span<const double> weights,
                                          std::span<const Instance> instances,
                                          Execution execution = Execution::Parallel);

/// One report per instance; std::nullopt where the instance has zero evidence.
std::vector<std::optional<EdgeMomentReport>> batch_moments(const SpnGraph& graph, const DirichletPrior& prior,
                                                           std::span<const Instance> instances, MomentFunction f,
                                                           Execution execution = Execution::Parallel);

int worker_threads();

}  // namespace spn
