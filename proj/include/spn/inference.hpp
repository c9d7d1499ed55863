#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "spn/graph.hpp"

namespace spn {

/// Non-negative real stored as log-magnitude plus an explicit zero marker.
struct LogReal {
  double log = 0.0;
  bool zero = true;

  static constexpr LogReal zero_value() { return {0.0, true}; }
  static constexpr LogReal one() { return {0.0, false}; }
  static LogReal from_log(double log_value) { return {log_value, false}; }
  static LogReal from_linear(double x) { return x > 0.0 ? LogReal{std::log(x), false} : zero_value(); }

  double linear() const { return zero ? 0.0 : std::exp(log); }
  /// log value with -inf for the zero marker.
  double log_or_neg_inf() const { return zero ? -std::numeric_limits<double>::infinity() : log; }

  friend LogReal operator*(LogReal a, LogReal b) {
    return (a.zero || b.zero) ? zero_value() : LogReal{a.log + b.log, false};
  }
};

/// a + b in log space.
inline LogReal log_add(LogReal a, LogReal b) {
  if (a.zero) return b;
  if (b.zero) return a;
  return a.log >= b.log ? LogReal{a.log + std::log1p(std::exp(b.log - a.log)), false}
                        : LogReal{b.log + std::log1p(std::exp(a.log - b.log)), false};
}

/// Instrumentation for the linear-time contract: one pass touches every edge once.
struct PassCounters {
  std::uint64_t evaluation_passes = 0;
  std::uint64_t differentiation_passes = 0;
  std::uint64_t edge_visits = 0;

  PassCounters& operator+=(const PassCounters& o) {
    evaluation_passes += o.evaluation_passes;
    differentiation_passes += o.differentiation_passes;
    edge_visits += o.edge_visits;
    return *this;
  }
};

/// Cached forward values V_k and backward derivatives D_k = dV_root/dV_k for one
/// (instance, weights) pair.
struct CircuitTrace {
  std::vector<LogReal> values;
  std::vector<LogReal> derivs;
  Instance instance;
  std::uint64_t weights_tag = 0;
  bool has_derivs = false;
  PassCounters counters;

  // Per product node: number of zero-valued children and log-product of the others.
  // Lets the backward pass form sibling products without dividing by zero.
  std::vector<std::uint32_t> zero_children;
  std::vector<double> nonzero_log_product;

  LogReal root_value(const SpnGraph& graph) const { return values[graph.root()]; }
};

/// Bottom-up pass. Weights are per-edge (product entries ignored); they are not required
/// to be normalized, and a zero weight drops its edge. Throws StructureError when the
/// weight or instance shape does not match the graph.
CircuitTrace evaluate(const SpnGraph& graph, std::span<const double> weights, const Instance& instance,
                      std::uint64_t weights_tag = 0);

/// Top-down pass filling trace.derivs; `weights` must be the ones used by evaluate.
void differentiate(const SpnGraph& graph, std::span<const double> weights, CircuitTrace& trace);

/// Both passes.
CircuitTrace evaluate_and_differentiate(const SpnGraph& graph, std::span<const double> weights,
                                        const Instance& instance);

/// log V_root(x;w) - log V_root(1;w). Zero-probability instances return the zero marker.
LogReal log_likelihood(const SpnGraph& graph, std::span<const double> weights, const Instance& instance);

using TreeCount = boost::multiprecision::cpp_int;

/// V_root(1;1) in exact integer arithmetic: the number of distinct induced trees.
TreeCount count_induced_trees(const SpnGraph& graph);

}  // namespace spn
