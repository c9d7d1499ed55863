#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spn {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class NodeType : std::uint8_t { Sum, Product, Leaf };

/// A node of the circuit. `var`/`value` are meaningful for indicator leaves only.
struct Node {
  NodeType type = NodeType::Leaf;
  std::uint32_t var = 0;
  std::uint32_t value = 0;

  static Node sum() { return {NodeType::Sum, 0, 0}; }
  static Node product() { return {NodeType::Product, 0, 0}; }
  static Node leaf(std::uint32_t var, std::uint32_t value) { return {NodeType::Leaf, var, value}; }

  bool is_sum() const { return type == NodeType::Sum; }
  bool is_product() const { return type == NodeType::Product; }
  bool is_leaf() const { return type == NodeType::Leaf; }

  friend bool operator==(const Node&, const Node&) = default;
};

/// One declared edge; `weight` is present exactly when `parent` is a sum node.
struct EdgeSpec {
  NodeId parent = 0;
  NodeId child = 0;
  std::optional<double> weight;

  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

/// Per-edge reals indexed by EdgeId. Entries on product edges are ignored (kept at 1).
using EdgeWeights = std::vector<double>;

/// Partial assignment: one category per variable, or kMissing to marginalize it out.
struct Instance {
  static constexpr std::int32_t kMissing = -1;

  std::vector<std::int32_t> values;

  static Instance all_missing(std::size_t num_vars) {
    return Instance{std::vector<std::int32_t>(num_vars, kMissing)};
  }
  std::size_t size() const { return values.size(); }
  bool missing(std::size_t var) const { return values[var] == kMissing; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Dirichlet hyperparameters, one per edge, aligned with the child order of each sum node.
/// Product-edge entries are unused.
struct DirichletPrior {
  EdgeWeights alpha;

  friend bool operator==(const DirichletPrior&, const DirichletPrior&) = default;
};

/// Immutable rooted DAG of sum, product and indicator-leaf nodes.
///
/// Edges are stored grouped by parent (CSR layout) in declaration order, so the edges of
/// node k are the contiguous ids [edge_begin(k), edge_end(k)) and the child position of
/// an edge is its offset within that range. Construction checks local shape only: ids in
/// range, no parallel edges, weights present exactly on sum edges, no children under a
/// leaf. Global properties (acyclicity, single root, completeness, decomposability,
/// normalization) are reported by validate().
class SpnGraph {
 public:
  SpnGraph() = default;
  SpnGraph(std::vector<Node> nodes, const std::vector<EdgeSpec>& edges,
           std::optional<std::uint32_t> declared_vars = std::nullopt);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return child_ids_.size(); }
  std::size_t num_vars() const { return arities_.size(); }
  bool vars_declared() const { return vars_declared_; }

  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const Node> nodes() const { return nodes_; }

  EdgeId edge_begin(NodeId id) const { return child_offsets_[id]; }
  EdgeId edge_end(NodeId id) const { return child_offsets_[id + 1]; }
  std::size_t num_children(NodeId id) const { return edge_end(id) - edge_begin(id); }
  std::span<const NodeId> children(NodeId id) const {
    return std::span<const NodeId>(child_ids_).subspan(edge_begin(id), num_children(id));
  }
  NodeId edge_parent(EdgeId e) const { return edge_parents_[e]; }
  NodeId edge_child(EdgeId e) const { return child_ids_[e]; }
  std::uint32_t edge_position(EdgeId e) const { return e - edge_begin(edge_parents_[e]); }
  std::optional<EdgeId> find_edge(NodeId parent, NodeId child) const;

  std::uint32_t num_parents(NodeId id) const { return parent_counts_[id]; }
  std::span<const std::uint32_t> arities() const { return arities_; }

  /// Declared sum-edge weights; product-edge entries are 1.
  const EdgeWeights& weights() const { return weights_; }

  /// Sum nodes in ascending id order.
  std::span<const NodeId> sum_nodes() const { return sum_nodes_; }

  /// Parentless nodes in ascending id order. A well-formed graph has exactly one.
  std::span<const NodeId> roots() const { return roots_; }
  /// The unique parentless node. Throws StructureError when there is not exactly one.
  NodeId root() const;

  bool is_acyclic() const { return !topo_order_.empty() || nodes_.empty(); }
  /// Children before parents, grouped by height (leaves first), ascending id within a
  /// height. Throws StructureError on a cycle.
  std::span<const NodeId> topo_order() const;

  /// Same structure with different sum-edge weights. Throws StructureError on a size mismatch.
  SpnGraph with_weights(const EdgeWeights& weights) const;

  /// Edge list in CSR order, weights attached to sum edges.
  std::vector<EdgeSpec> edge_specs() const;

  friend bool operator==(const SpnGraph& a, const SpnGraph& b) {
    return a.nodes_ == b.nodes_ && a.child_offsets_ == b.child_offsets_ &&
           a.child_ids_ == b.child_ids_ && a.weights_ == b.weights_ && a.arities_ == b.arities_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<EdgeId> child_offsets_{0};
  std::vector<NodeId> child_ids_;
  std::vector<NodeId> edge_parents_;
  EdgeWeights weights_;
  std::vector<std::uint32_t> parent_counts_;
  std::vector<std::uint32_t> arities_;
  std::vector<NodeId> sum_nodes_;
  std::vector<NodeId> roots_;
  std::vector<NodeId> topo_order_;
  std::string cycle_message_;
  bool vars_declared_ = false;
};

/// Dense node-id topological order (children first, grouped by height, ascending id).
/// Throws StructureError naming one edge on a cycle.
std::vector<NodeId> topological_order(const SpnGraph& graph);

/// All-ones hyperparameters (uniform Dirichlet on every sum node).
DirichletPrior uniform_prior(const SpnGraph& graph);

enum class Check { Acyclic, SingleRoot, Reachable, Arity, ChildCount, Complete, Decomposable, Normalized };

const char* check_name(Check check);

struct Violation {
  Check check;
  NodeId node;
  std::string message;
};

/// Outcome of validate(): scopes (sorted variable lists, empty when the graph is cyclic)
/// and every violation found.
struct ValidationReport {
  std::vector<std::vector<std::uint32_t>> scopes;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool passed(Check check) const;
};

inline constexpr double kNormalizationTolerance = 1e-9;

ValidationReport validate(const SpnGraph& graph);

/// Throws StructureError with the first violation when the graph is not valid.
void require_valid(const SpnGraph& graph);

}  // namespace spn
