#include "spn/oracle.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <functional>
#include <map>
#include <optional>

#include "spn/errors.hpp"

namespace spn::oracle {

namespace {

using EdgeList = std::vector<EdgeId>;

class Enumerator {
 public:
  Enumerator(const SpnGraph& graph, std::size_t cap) : graph_(graph), cap_(cap), memo_(graph.num_nodes()) {}

  const std::vector<EdgeList>& trees(NodeId v) {
    if (memo_[v]) return *memo_[v];
    std::vector<EdgeList> out;
    const Node& node = graph_.node(v);
    if (node.is_leaf()) {
      out.emplace_back();
    } else if (node.is_sum()) {
      for (EdgeId e = graph_.edge_begin(v); e < graph_.edge_end(v); ++e) {
        for (const EdgeList& sub : trees(graph_.edge_child(e))) {
          EdgeList t;
          t.reserve(sub.size() + 1);
          t.push_back(e);
          t.insert(t.end(), sub.begin(), sub.end());
          out.push_back(std::move(t));
          check(out.size());
        }
      }
    } else {
      EdgeList own;
      for (EdgeId e = graph_.edge_begin(v); e < graph_.edge_end(v); ++e) own.push_back(e);
      out.push_back(own);
      // Cartesian product; earlier children vary slowest.
      for (EdgeId e = graph_.edge_begin(v); e < graph_.edge_end(v); ++e) {
        const auto& child_trees = trees(graph_.edge_child(e));
        std::vector<EdgeList> next;
        check(out.size() * child_trees.size());
        next.reserve(out.size() * child_trees.size());
        for (const EdgeList& prefix : out) {
          for (const EdgeList& sub : child_trees) {
            EdgeList t = prefix;
            t.insert(t.end(), sub.begin(), sub.end());
            next.push_back(std::move(t));
          }
        }
        out = std::move(next);
      }
    }
    memo_[v] = std::move(out);
    return *memo_[v];
  }

 private:
  void check(std::size_t count) const {
    if (count > cap_)
      throw CapExceededError("induced-tree enumeration exceeds the cap of " + std::to_string(cap_) + " trees");
  }

  const SpnGraph& graph_;
  std::size_t cap_;
  std::vector<std::optional<std::vector<EdgeList>>> memo_;
};

}  // namespace

std::vector<InducedTree> enumerate_trees(const SpnGraph& graph, std::size_t cap) {
  const NodeId root = graph.root();
  graph.topo_order();  // rejects cycles before recursing
  Enumerator enumerator(graph, cap);
  const auto& lists = enumerator.trees(root);
  std::vector<InducedTree> out;
  out.reserve(lists.size());
  for (const EdgeList& edges : lists) {
    InducedTree tree;
    tree.edges = edges;
    std::sort(tree.edges.begin(), tree.edges.end());
    tree.nodes.push_back(root);
    for (EdgeId e : edges) tree.nodes.push_back(graph.edge_child(e));
    std::sort(tree.nodes.begin(), tree.nodes.end());
    out.push_back(std::move(tree));
  }
  return out;
}

bool is_induced_tree(const SpnGraph& graph, const InducedTree& tree) {
  const auto& nodes = tree.nodes;
  auto contains = [&](NodeId v) { return std::binary_search(nodes.begin(), nodes.end(), v); };
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) return false;
  if (tree.edges.size() + 1 != nodes.size()) return false;
  if (!contains(graph.root())) return false;

  std::vector<std::uint32_t> chosen(graph.num_nodes(), 0);
  std::vector<std::uint32_t> in_degree(graph.num_nodes(), 0);
  for (EdgeId e : tree.edges) {
    if (e >= graph.num_edges()) return false;
    if (!contains(graph.edge_parent(e)) || !contains(graph.edge_child(e))) return false;
    ++chosen[graph.edge_parent(e)];
    ++in_degree[graph.edge_child(e)];
  }
  for (NodeId v : nodes) {
    const Node& node = graph.node(v);
    if (node.is_sum() && chosen[v] != 1) return false;
    if (node.is_product() && chosen[v] != graph.num_children(v)) return false;
    if (v != graph.root() && in_degree[v] != 1) return false;
  }
  // With one parent per non-root node and |E| = |V| - 1, reachability from the root
  // makes it a tree.
  std::vector<char> seen(graph.num_nodes(), 0);
  std::vector<NodeId> stack{graph.root()};
  seen[graph.root()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (EdgeId e = graph.edge_begin(v); e < graph.edge_end(v); ++e) {
      if (!std::binary_search(tree.edges.begin(), tree.edges.end(), e)) continue;
      NodeId c = graph.edge_child(e);
      if (!seen[c]) {
        seen[c] = 1;
        ++reached;
        stack.push_back(c);
      }
    }
  }
  return reached == nodes.size();
}

double dirichlet_moment(double a, double total, MomentFunction f) {
  switch (f) {
    case MomentFunction::Mean: return a / total;
    case MomentFunction::SecondMoment: return (a / total) * ((a + 1.0) / (total + 1.0));
    case MomentFunction::LogMoment: return boost::math::digamma(a) - boost::math::digamma(total);
  }
  return 0.0;
}

TreeOracle::TreeOracle(const SpnGraph& graph, std::size_t cap)
    : graph_(&graph), trees_(enumerate_trees(graph, cap)) {}

double TreeOracle::leaf_product(const InducedTree& tree, const Instance& instance) const {
  for (NodeId v : tree.nodes) {
    const Node& node = graph_->node(v);
    if (!node.is_leaf()) continue;
    const auto x = instance.values[node.var];
    if (x != Instance::kMissing && static_cast<std::uint32_t>(x) != node.value) return 0.0;
  }
  return 1.0;
}

TreeTerm TreeOracle::term(const InducedTree& tree, const Instance& instance, const DirichletPrior& prior,
                          std::span<const double> weights) const {
  TreeTerm t;
  t.c = leaf_product(tree, instance);
  t.u = 1.0;
  t.w = 1.0;
  for (EdgeId e : tree.edges) {
    const NodeId k = graph_->edge_parent(e);
    if (!graph_->node(k).is_sum()) continue;
    if (!prior.alpha.empty()) {
      double total = 0.0;
      for (EdgeId s = graph_->edge_begin(k); s < graph_->edge_end(k); ++s) total += prior.alpha[s];
      t.u *= prior.alpha[e] / total;
    }
    if (!weights.empty()) t.w *= weights[e];
  }
  return t;
}

double TreeOracle::polynomial(std::span<const double> weights, const Instance& instance) const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    const TreeTerm t = term(tree, instance, DirichletPrior{}, weights);
    total += t.w * t.c;
  }
  return total;
}

double TreeOracle::z(const DirichletPrior& prior, const Instance& instance) const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    const TreeTerm t = term(tree, instance, prior, {});
    total += t.c * t.u;
  }
  return total;
}

std::vector<double> TreeOracle::edge_masses(const DirichletPrior& prior, const Instance& instance) const {
  std::vector<double> mass(graph_->num_edges(), 0.0);
  for (const auto& tree : trees_) {
    const TreeTerm t = term(tree, instance, prior, {});
    const double cu = t.c * t.u;
    if (cu == 0.0) continue;
    for (EdgeId e : tree.edges) mass[e] += cu;
  }
  return mass;
}

double TreeOracle::lambda(const DirichletPrior& prior, const Instance& instance, EdgeId edge) const {
  double with = 0.0;
  double total = 0.0;
  for (const auto& tree : trees_) {
    const TreeTerm t = term(tree, instance, prior, {});
    total += t.c * t.u;
    if (std::binary_search(tree.edges.begin(), tree.edges.end(), edge)) with += t.c * t.u;
  }
  if (total == 0.0) throw ZeroEvidenceError("instance has zero probability (Z_x = 0)");
  return with / total;
}

double TreeOracle::moment(const DirichletPrior& prior, const Instance& instance, EdgeId edge,
                          MomentFunction f) const {
  const NodeId k = graph_->edge_parent(edge);
  if (!graph_->node(k).is_sum()) throw DomainError("moments are defined on sum edges only");
  double with = 0.0;
  double without = 0.0;
  for (const auto& tree : trees_) {
    const TreeTerm t = term(tree, instance, prior, {});
    if (std::binary_search(tree.edges.begin(), tree.edges.end(), edge))
      with += t.c * t.u;
    else
      without += t.c * t.u;
  }
  const double z = with + without;
  if (z == 0.0) throw ZeroEvidenceError("instance has zero probability (Z_x = 0)");
  double total = 0.0;
  for (EdgeId s = graph_->edge_begin(k); s < graph_->edge_end(k); ++s) total += prior.alpha[s];
  const double a = prior.alpha[edge];
  return (without * dirichlet_moment(a, total, f) + with * dirichlet_moment(a + 1.0, total + 1.0, f)) / z;
}

std::vector<double> TreeOracle::moments(const DirichletPrior& prior, const Instance& instance,
                                        MomentFunction f) const {
  const std::vector<double> with = edge_masses(prior, instance);
  const double z_total = z(prior, instance);
  if (z_total == 0.0) throw ZeroEvidenceError("instance has zero probability (Z_x = 0)");
  std::vector<double> out(graph_->num_edges(), 0.0);
  for (NodeId k : graph_->sum_nodes()) {
    double total = 0.0;
    for (EdgeId e = graph_->edge_begin(k); e < graph_->edge_end(k); ++e) total += prior.alpha[e];
    for (EdgeId e = graph_->edge_begin(k); e < graph_->edge_end(k); ++e) {
      const double without = z_total - with[e];
      const double a = prior.alpha[e];
      out[e] = (without * dirichlet_moment(a, total, f) + with[e] * dirichlet_moment(a + 1.0, total + 1.0, f)) / z_total;
    }
  }
  return out;
}

double oracle_polynomial(const SpnGraph& graph, std::span<const double> weights, const Instance& instance,
                         std::size_t cap) {
  return TreeOracle(graph, cap).polynomial(weights, instance);
}

double oracle_moment(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance, EdgeId edge,
                     MomentFunction f, std::size_t cap) {
  return TreeOracle(graph, cap).moment(prior, instance, edge, f);
}

double oracle_lambda(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance, EdgeId edge,
                     std::size_t cap) {
  return TreeOracle(graph, cap).lambda(prior, instance, edge);
}

namespace {

class Generator {
 public:
  explicit Generator(const RandomSpnParams& p) : p_(p), rng_(p.seed) {}

  SpnGraph build() {
    std::vector<std::uint32_t> scope(p_.num_vars);
    for (std::uint32_t i = 0; i < p_.num_vars; ++i) scope[i] = i;
    make_sum(scope, p_.depth);
    // The root is created last; renumber so it becomes 0 and children follow their parents.
    const auto n = static_cast<NodeId>(nodes_.size());
    auto remap = [&](NodeId v) { return n - 1 - v; };
    std::vector<Node> nodes(nodes_.rbegin(), nodes_.rend());
    std::vector<EdgeSpec> edges;
    edges.reserve(edges_.size());
    for (auto& e : edges_) edges.push_back({remap(e.parent), remap(e.child), e.weight});
    std::stable_sort(edges.begin(), edges.end(),
                     [](const EdgeSpec& a, const EdgeSpec& b) { return a.parent < b.parent; });
    return SpnGraph(std::move(nodes), edges);
  }

 private:
  static std::size_t min_scope(std::uint32_t depth) { return std::size_t{1} << (depth - 1); }

  NodeId add(Node node) {
    nodes_.push_back(node);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void add_sum_edges(NodeId parent, const std::vector<NodeId>& children) {
    std::exponential_distribution<double> gamma1(1.0);
    std::vector<double> w(children.size());
    double total = 0.0;
    for (double& x : w) total += (x = gamma1(rng_));
    for (std::size_t i = 0; i < children.size(); ++i) edges_.push_back({parent, children[i], w[i] / total});
  }

  NodeId univariate(std::uint32_t var) {
    std::vector<NodeId> leaves;
    for (std::uint32_t value = 0; value < p_.arity; ++value) leaves.push_back(add(Node::leaf(var, value)));
    NodeId s = add(Node::sum());
    add_sum_edges(s, leaves);
    return s;
  }

  std::optional<NodeId> reuse(std::uint32_t level, const std::vector<std::uint32_t>& scope) {
    auto it = cache_.find({level, scope});
    if (it == cache_.end() || it->second.empty()) return std::nullopt;
    std::bernoulli_distribution merge(p_.dag_merge_probability);
    if (!merge(rng_)) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
    return it->second[pick(rng_)];
  }

  NodeId make_sum(std::vector<std::uint32_t> scope, std::uint32_t depth) {
    std::sort(scope.begin(), scope.end());
    const std::uint32_t level = scope.size() == 1 && depth <= 1 ? 0 : depth;
    if (auto shared = reuse(level, scope)) return *shared;

    NodeId result;
    if (scope.size() == 1 && depth <= 1) {
      result = univariate(scope.front());
    } else {
      std::vector<NodeId> products;
      for (std::uint32_t i = 0; i < p_.sum_fanout; ++i) products.push_back(make_product(scope, depth));
      result = add(Node::sum());
      add_sum_edges(result, products);
    }
    cache_[{level, scope}].push_back(result);
    return result;
  }

  NodeId make_product(const std::vector<std::uint32_t>& scope, std::uint32_t depth) {
    std::vector<NodeId> children;
    if (depth == 1) {
      for (std::uint32_t var : scope) children.push_back(make_sum({var}, 0));
    } else {
      const std::size_t block_min = min_scope(depth - 1);
      const std::size_t blocks = std::min<std::size_t>(p_.product_fanout, scope.size() / block_min);
      std::vector<std::uint32_t> shuffled = scope;
      std::shuffle(shuffled.begin(), shuffled.end(), rng_);
      std::vector<std::size_t> sizes(blocks, block_min);
      std::uniform_int_distribution<std::size_t> which(0, blocks - 1);
      for (std::size_t extra = scope.size() - blocks * block_min; extra > 0; --extra) ++sizes[which(rng_)];
      std::size_t offset = 0;
      for (std::size_t b = 0; b < blocks; ++b) {
        std::vector<std::uint32_t> block(shuffled.begin() + offset, shuffled.begin() + offset + sizes[b]);
        offset += sizes[b];
        children.push_back(make_sum(std::move(block), depth - 1));
      }
    }
    const NodeId p = add(Node::product());
    for (NodeId c : children) edges_.push_back({p, c, std::nullopt});
    return p;
  }

  RandomSpnParams p_;
  std::mt19937_64 rng_;
  std::vector<Node> nodes_;
  std::vector<EdgeSpec> edges_;
  std::map<std::pair<std::uint32_t, std::vector<std::uint32_t>>, std::vector<NodeId>> cache_;
};

}  // namespace

SpnGraph generate_random_spn(const RandomSpnParams& params) {
  if (params.num_vars == 0 || params.depth == 0 || params.sum_fanout == 0 || params.arity == 0)
    throw DomainError("generator parameters must be positive");
  if (params.depth > 1 && params.product_fanout < 2)
    throw DomainError("product_fanout must be at least 2 when depth > 1");
  if (params.depth > 32 || params.num_vars < (std::uint64_t{1} << (params.depth - 1)))
    throw DomainError("scope too small to split: depth " + std::to_string(params.depth) + " needs at least " +
                      std::to_string(std::uint64_t{1} << std::min<std::uint32_t>(params.depth - 1, 63)) +
                      " variables");
  if (!(params.dag_merge_probability >= 0.0 && params.dag_merge_probability <= 1.0))
    throw DomainError("dag_merge_probability must lie in [0, 1]");
  return Generator(params).build();
}

Instance sample_instance(const SpnGraph& graph, std::span<const double> weights, std::mt19937_64& rng) {
  Instance inst = Instance::all_missing(graph.num_vars());
  std::vector<NodeId> stack{graph.root()};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    const Node& node = graph.node(v);
    if (node.is_leaf()) {
      inst.values[node.var] = static_cast<std::int32_t>(node.value);
    } else if (node.is_product()) {
      for (NodeId c : graph.children(v)) stack.push_back(c);
    } else {
      const EdgeId begin = graph.edge_begin(v);
      std::discrete_distribution<std::size_t> pick(weights.begin() + begin, weights.begin() + graph.edge_end(v));
      stack.push_back(graph.edge_child(begin + static_cast<EdgeId>(pick(rng))));
    }
  }
  return inst;
}

Instance random_instance(const SpnGraph& graph, std::mt19937_64& rng, double missing_probability) {
  Instance inst = Instance::all_missing(graph.num_vars());
  std::bernoulli_distribution missing(missing_probability);
  for (std::size_t var = 0; var < graph.num_vars(); ++var) {
    std::uniform_int_distribution<std::int32_t> value(0, static_cast<std::int32_t>(graph.arities()[var]) - 1);
    const std::int32_t x = value(rng);
    if (!missing(rng)) inst.values[var] = x;
  }
  return inst;
}

}  // namespace spn::oracle
