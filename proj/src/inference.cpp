#include "spn/inference.hpp"

#include "spn/errors.hpp"

namespace spn {

namespace {

void check_shapes(const SpnGraph& graph, std::span<const double> weights, const Instance& instance) {
  if (weights.size() != graph.num_edges())
    throw StructureError("weight vector has " + std::to_string(weights.size()) + " entries; graph has " +
                         std::to_string(graph.num_edges()) + " edges");
  if (instance.size() != graph.num_vars())
    throw StructureError("instance has " + std::to_string(instance.size()) + " values; graph has " +
                         std::to_string(graph.num_vars()) + " variables");
}

}  // namespace

CircuitTrace evaluate(const SpnGraph& graph, std::span<const double> weights, const Instance& instance,
                      std::uint64_t weights_tag) {
  check_shapes(graph, weights, instance);
  const std::size_t n = graph.num_nodes();
  CircuitTrace trace;
  trace.values.assign(n, LogReal::zero_value());
  trace.zero_children.assign(n, 0);
  trace.nonzero_log_product.assign(n, 0.0);
  trace.instance = instance;
  trace.weights_tag = weights_tag;
  auto& values = trace.values;
  std::uint64_t visits = 0;

  for (NodeId k : graph.topo_order()) {
    const Node& node = graph.node(k);
    switch (node.type) {
      case NodeType::Leaf: {
        auto x = instance.values[node.var];
        values[k] = (x == Instance::kMissing || static_cast<std::uint32_t>(x) == node.value) ? LogReal::one()
                                                                                              : LogReal::zero_value();
        break;
      }
      case NodeType::Product: {
        std::uint32_t zeros = 0;
        double log_sum = 0.0;
        for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
          ++visits;
          const LogReal& v = values[graph.edge_child(e)];
          if (v.zero)
            ++zeros;
          else
            log_sum += v.log;
        }
        trace.zero_children[k] = zeros;
        trace.nonzero_log_product[k] = log_sum;
        values[k] = zeros ? LogReal::zero_value() : LogReal::from_log(log_sum);
        break;
      }
      case NodeType::Sum: {
        // Streaming log-sum-exp: one exp per edge.
        double max = 0.0;
        double acc = 0.0;
        bool any = false;
        for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
          ++visits;
          const LogReal& v = values[graph.edge_child(e)];
          const double w = weights[e];
          if (v.zero || !(w > 0.0)) continue;
          const double term = std::log(w) + v.log;
          if (!any) {
            max = term;
            acc = 1.0;
            any = true;
          } else if (term > max) {
            acc = acc * std::exp(max - term) + 1.0;
            max = term;
          } else {
            acc += std::exp(term - max);
          }
        }
        values[k] = any ? LogReal::from_log(max + std::log(acc)) : LogReal::zero_value();
        break;
      }
    }
  }
  trace.counters.evaluation_passes = 1;
  trace.counters.edge_visits = visits;
  return trace;
}

void differentiate(const SpnGraph& graph, std::span<const double> weights, CircuitTrace& trace) {
  if (trace.values.size() != graph.num_nodes())
    throw StructureError("differentiate requires a trace with forward values for this graph");
  if (weights.size() != graph.num_edges()) throw StructureError("weight vector does not match graph");

  auto& derivs = trace.derivs;
  const auto& values = trace.values;
  derivs.assign(graph.num_nodes(), LogReal::zero_value());
  derivs[graph.root()] = LogReal::one();
  std::uint64_t visits = 0;

  auto order = graph.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId k = *it;
    const Node& node = graph.node(k);
    if (node.is_leaf()) continue;
    const EdgeId begin = graph.edge_begin(k);
    const EdgeId end = graph.edge_end(k);
    visits += end - begin;
    const LogReal dk = derivs[k];
    if (dk.zero) continue;
    if (node.is_sum()) {
      for (EdgeId e = begin; e < end; ++e) {
        const double w = weights[e];
        if (!(w > 0.0)) continue;
        LogReal& dj = derivs[graph.edge_child(e)];
        dj = log_add(dj, LogReal::from_log(dk.log + std::log(w)));
      }
    } else {
      const std::uint32_t zeros = trace.zero_children[k];
      if (zeros > 1) continue;
      const double log_product = trace.nonzero_log_product[k];
      for (EdgeId e = begin; e < end; ++e) {
        const NodeId j = graph.edge_child(e);
        const LogReal& vj = values[j];
        // Product of the siblings of j: nonzero iff j holds the only zero, or there is none.
        double sibling;
        if (zeros == 0)
          sibling = log_product - vj.log;
        else if (vj.zero)
          sibling = log_product;
        else
          continue;
        derivs[j] = log_add(derivs[j], LogReal::from_log(dk.log + sibling));
      }
    }
  }
  trace.has_derivs = true;
  trace.counters.differentiation_passes += 1;
  trace.counters.edge_visits += visits;
}

CircuitTrace evaluate_and_differentiate(const SpnGraph& graph, std::span<const double> weights,
                                        const Instance& instance) {
  CircuitTrace trace = evaluate(graph, weights, instance);
  differentiate(graph, weights, trace);
  return trace;
}

LogReal log_likelihood(const SpnGraph& graph, std::span<const double> weights, const Instance& instance) {
  const LogReal joint = evaluate(graph, weights, instance).root_value(graph);
  if (joint.zero) return joint;
  const LogReal norm = evaluate(graph, weights, Instance::all_missing(graph.num_vars())).root_value(graph);
  return LogReal::from_log(joint.log - norm.log);
}

TreeCount count_induced_trees(const SpnGraph& graph) {
  std::vector<TreeCount> count(graph.num_nodes());
  for (NodeId k : graph.topo_order()) {
    const Node& node = graph.node(k);
    if (node.is_leaf()) {
      count[k] = 1;
    } else if (node.is_product()) {
      TreeCount c = 1;
      for (NodeId j : graph.children(k)) c *= count[j];
      count[k] = std::move(c);
    } else {
      TreeCount c = 0;
      for (NodeId j : graph.children(k)) c += count[j];
      count[k] = std::move(c);
    }
  }
  return count[graph.root()];
}

}  // namespace spn
