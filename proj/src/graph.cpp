#include "spn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spn/errors.hpp"

namespace spn {

namespace {

std::string edge_text(NodeId parent, NodeId child) {
  return std::to_string(parent) + " -> " + std::to_string(child);
}

// Kahn's algorithm on the reversed graph, processed in waves: wave 0 holds the leaves
// (and any childless node), wave i+1 the nodes whose last child finished in wave i. Each
// wave is emitted in ascending id order, so the order is deterministic and height-sorted.
// Returns an empty vector on a cycle and fills `cycle` with one offending edge.
std::vector<NodeId> kahn_order(std::size_t n, const std::vector<EdgeId>& offsets,
                               const std::vector<NodeId>& child_ids,
                               const std::vector<NodeId>& edge_parents, std::string& cycle) {
  std::vector<std::uint32_t> pending(n);
  std::vector<std::vector<NodeId>> parents(n);
  for (std::size_t v = 0; v < n; ++v) pending[v] = offsets[v + 1] - offsets[v];
  for (std::size_t e = 0; e < child_ids.size(); ++e) parents[child_ids[e]].push_back(edge_parents[e]);

  std::vector<NodeId> wave;
  for (NodeId v = 0; v < n; ++v)
    if (pending[v] == 0) wave.push_back(v);

  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<NodeId> next;
  while (!wave.empty()) {
    order.insert(order.end(), wave.begin(), wave.end());
    next.clear();
    for (NodeId v : wave)
      for (NodeId p : parents[v])
        if (--pending[p] == 0) next.push_back(p);
    std::sort(next.begin(), next.end());
    wave.swap(next);
  }
  if (order.size() == n) return order;

  // Every unfinished node has an unfinished child, so walking unfinished children must
  // revisit a node; the closing edge lies on a cycle.
  std::vector<char> done(n, 0);
  for (NodeId v : order) done[v] = 1;
  NodeId start = 0;
  while (done[start]) ++start;
  std::vector<int> seen_at(n, -1);
  NodeId cur = start;
  for (int step = 0;; ++step) {
    seen_at[cur] = step;
    NodeId next = cur;
    for (EdgeId e = offsets[cur]; e < offsets[cur + 1]; ++e) {
      if (!done[child_ids[e]]) {
        next = child_ids[e];
        break;
      }
    }
    if (seen_at[next] >= 0) {
      cycle = "cycle detected through edge " + edge_text(cur, next);
      break;
    }
    cur = next;
  }
  return {};
}

}  // namespace

SpnGraph::SpnGraph(std::vector<Node> nodes, const std::vector<EdgeSpec>& edges,
                   std::optional<std::uint32_t> declared_vars)
    : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  for (const auto& e : edges) {
    if (e.parent >= n || e.child >= n)
      throw StructureError("unknown node id in edge " + edge_text(e.parent, e.child));
    const Node& p = nodes_[e.parent];
    if (p.is_leaf())
      throw StructureError("leaf node " + std::to_string(e.parent) + " cannot have children");
    if (p.is_sum() && !e.weight)
      throw StructureError("missing weight on sum edge " + edge_text(e.parent, e.child));
    if (!p.is_sum() && e.weight)
      throw StructureError("weight on non-sum edge " + edge_text(e.parent, e.child));
    if (e.weight && !std::isfinite(*e.weight))
      throw StructureError("non-finite weight on edge " + edge_text(e.parent, e.child));
  }

  // Stable bucket by parent keeps declaration order within each child list.
  child_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) ++child_offsets_[e.parent + 1];
  for (std::size_t v = 0; v < n; ++v) child_offsets_[v + 1] += child_offsets_[v];
  child_ids_.resize(edges.size());
  edge_parents_.resize(edges.size());
  weights_.assign(edges.size(), 1.0);
  std::vector<EdgeId> cursor(child_offsets_.begin(), child_offsets_.end() - 1);
  for (const auto& e : edges) {
    EdgeId slot = cursor[e.parent]++;
    child_ids_[slot] = e.child;
    edge_parents_[slot] = e.parent;
    if (e.weight) weights_[slot] = *e.weight;
  }
  for (NodeId v = 0; v < n; ++v) {
    auto ch = children(v);
    std::vector<NodeId> sorted(ch.begin(), ch.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw StructureError("parallel edges under node " + std::to_string(v));
  }

  parent_counts_.assign(n, 0);
  for (NodeId c : child_ids_) ++parent_counts_[c];
  for (NodeId v = 0; v < n; ++v) {
    if (parent_counts_[v] == 0) roots_.push_back(v);
    if (nodes_[v].is_sum()) sum_nodes_.push_back(v);
  }

  std::uint32_t vars = 0;
  for (const Node& node : nodes_)
    if (node.is_leaf()) vars = std::max(vars, node.var + 1);
  if (declared_vars) {
    vars_declared_ = true;
    vars = std::max(vars, *declared_vars);
  }
  arities_.assign(vars, 0);
  for (const Node& node : nodes_)
    if (node.is_leaf()) arities_[node.var] = std::max(arities_[node.var], node.value + 1);
  if (declared_vars) arities_.resize(*declared_vars);

  topo_order_ = kahn_order(n, child_offsets_, child_ids_, edge_parents_, cycle_message_);
}

std::optional<EdgeId> SpnGraph::find_edge(NodeId parent, NodeId child) const {
  if (parent >= num_nodes()) return std::nullopt;
  for (EdgeId e = edge_begin(parent); e < edge_end(parent); ++e)
    if (child_ids_[e] == child) return e;
  return std::nullopt;
}

NodeId SpnGraph::root() const {
  if (roots_.size() != 1)
    throw StructureError("graph has " + std::to_string(roots_.size()) + " parentless nodes; expected 1");
  return roots_.front();
}

std::span<const NodeId> SpnGraph::topo_order() const {
  if (!is_acyclic()) throw StructureError(cycle_message_);
  return topo_order_;
}

SpnGraph SpnGraph::with_weights(const EdgeWeights& weights) const {
  if (weights.size() != num_edges())
    throw StructureError("weight vector has " + std::to_string(weights.size()) + " entries; graph has " +
                         std::to_string(num_edges()) + " edges");
  SpnGraph copy = *this;
  for (EdgeId e = 0; e < num_edges(); ++e)
    if (nodes_[edge_parents_[e]].is_sum()) copy.weights_[e] = weights[e];
  return copy;
}

std::vector<EdgeSpec> SpnGraph::edge_specs() const {
  std::vector<EdgeSpec> out;
  out.reserve(num_edges());
  for (EdgeId e = 0; e < num_edges(); ++e) {
    EdgeSpec spec{edge_parents_[e], child_ids_[e], std::nullopt};
    if (nodes_[edge_parents_[e]].is_sum()) spec.weight = weights_[e];
    out.push_back(spec);
  }
  return out;
}

std::vector<NodeId> topological_order(const SpnGraph& graph) {
  auto order = graph.topo_order();
  return {order.begin(), order.end()};
}

DirichletPrior uniform_prior(const SpnGraph& graph) {
  return DirichletPrior{EdgeWeights(graph.num_edges(), 1.0)};
}

const char* check_name(Check check) {
  switch (check) {
    case Check::Acyclic: return "acyclic";
    case Check::SingleRoot: return "single-root";
    case Check::Reachable: return "reachable";
    case Check::Arity: return "arity";
    case Check::ChildCount: return "child-count";
    case Check::Complete: return "complete";
    case Check::Decomposable: return "decomposable";
    case Check::Normalized: return "normalized";
  }
  return "?";
}

bool ValidationReport::passed(Check check) const {
  return std::none_of(violations.begin(), violations.end(),
                      [&](const Violation& v) { return v.check == check; });
}

namespace {

std::string scope_text(const std::vector<std::uint32_t>& scope) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < scope.size(); ++i) os << (i ? ", " : "") << scope[i];
  os << '}';
  return os.str();
}

}  // namespace

ValidationReport validate(const SpnGraph& graph) {
  ValidationReport report;
  auto add = [&](Check check, NodeId node, std::string message) {
    report.violations.push_back({check, node, std::move(message)});
  };
  const std::size_t n = graph.num_nodes();
  if (n == 0) {
    add(Check::SingleRoot, 0, "graph has no nodes");
    return report;
  }

  if (graph.roots().size() != 1) {
    std::string ids;
    for (NodeId r : graph.roots()) ids += (ids.empty() ? "" : ", ") + std::to_string(r);
    add(Check::SingleRoot, graph.roots().empty() ? 0 : graph.roots().front(),
        "expected exactly one parentless node, found " + std::to_string(graph.roots().size()) +
            (ids.empty() ? "" : " (" + ids + ")"));
  }

  for (NodeId v = 0; v < n; ++v) {
    const Node& node = graph.node(v);
    if (node.is_leaf()) {
      if (graph.vars_declared() && node.var >= graph.num_vars())
        add(Check::Arity, v, "node " + std::to_string(v) + ": leaf variable " + std::to_string(node.var) +
                                 " exceeds declared variable count " + std::to_string(graph.num_vars()));
    } else if (graph.num_children(v) == 0) {
      add(Check::ChildCount, v, "node " + std::to_string(v) + ": internal node has no children");
    }
  }

  for (NodeId k : graph.sum_nodes()) {
    double total = 0.0;
    bool positive = true;
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
      total += graph.weights()[e];
      positive = positive && graph.weights()[e] > 0.0;
    }
    if (!positive)
      add(Check::Normalized, k, "node " + std::to_string(k) + ": sum weights must be strictly positive");
    else if (graph.num_children(k) > 0 && std::abs(total - 1.0) > kNormalizationTolerance)
      add(Check::Normalized, k, "node " + std::to_string(k) + ": sum weights add to " + std::to_string(total));
  }

  if (!graph.is_acyclic()) {
    std::string message;
    try {
      graph.topo_order();
    } catch (const StructureError& e) {
      message = e.what();
    }
    add(Check::Acyclic, 0, message);
    return report;
  }

  if (graph.roots().size() == 1) {
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{graph.roots().front()};
    seen[stack.back()] = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId c : graph.children(v))
        if (!seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
    }
    for (NodeId v = 0; v < n; ++v)
      if (!seen[v]) add(Check::Reachable, v, "node " + std::to_string(v) + " is unreachable from the root");
  }

  auto& scopes = report.scopes;
  scopes.assign(n, {});
  for (NodeId v : graph.topo_order()) {
    const Node& node = graph.node(v);
    if (node.is_leaf()) {
      scopes[v] = {node.var};
      continue;
    }
    auto ch = graph.children(v);
    if (node.is_sum()) {
      for (NodeId c : ch) {
        if (scopes[c] != scopes[ch.front()]) {
          add(Check::Complete, v, "node " + std::to_string(v) + ": child " + std::to_string(c) + " has scope " +
                                      scope_text(scopes[c]) + " but child " + std::to_string(ch.front()) +
                                      " has scope " + scope_text(scopes[ch.front()]));
          break;
        }
      }
    }
    std::vector<std::uint32_t> merged;
    bool overlap = false;
    for (NodeId c : ch) {
      std::vector<std::uint32_t> next;
      std::set_union(merged.begin(), merged.end(), scopes[c].begin(), scopes[c].end(), std::back_inserter(next));
      if (node.is_product() && next.size() != merged.size() + scopes[c].size()) overlap = true;
      merged = std::move(next);
    }
    if (overlap)
      add(Check::Decomposable, v, "node " + std::to_string(v) + ": product children have overlapping scopes");
    scopes[v] = std::move(merged);
  }

  if (report.passed(Check::SingleRoot) && report.passed(Check::Reachable)) {
    const auto& root_scope = scopes[graph.roots().front()];
    if (root_scope.size() != graph.num_vars())
      add(Check::Arity, graph.roots().front(),
          "root scope " + scope_text(root_scope) + " does not cover all " + std::to_string(graph.num_vars()) +
              " variables");
  }
  return report;
}

void require_valid(const SpnGraph& graph) {
  auto report = validate(graph);
  if (!report.ok())
    throw StructureError(std::string("invalid SPN (") + check_name(report.violations.front().check) +
                         "): " + report.violations.front().message);
}

}  // namespace spn
