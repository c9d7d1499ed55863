#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spn/graph.hpp"
#include "spn/moments.hpp"

namespace spn::oracle {

// Exponential-time ground truth for desk-scale networks. Nothing here shares code with
// the circuit passes in inference/moments: every quantity is summed tree by tree.

inline constexpr std::size_t kDefaultTreeCap = 100000;

/// One induced tree: the root, one child edge per included sum node, all child edges
/// per included product node. Both lists are sorted.
struct InducedTree {
  std::vector<EdgeId> edges;
  std::vector<NodeId> nodes;
};

/// Per-tree quantities: c = leaf product under the instance, u = prior expectation of the
/// tree's weight product, w = weight product under explicit weights.
struct TreeTerm {
  double c = 0.0;
  double u = 0.0;
  double w = 0.0;
};

/// All induced trees, depth-first over sum choices in child order. Throws
/// CapExceededError once more than `cap` trees would be produced.
std::vector<InducedTree> enumerate_trees(const SpnGraph& graph, std::size_t cap = kDefaultTreeCap);

/// Checks the three induced-tree conditions plus connectivity and |E| = |V| - 1.
bool is_induced_tree(const SpnGraph& graph, const InducedTree& tree);

/// Enumerates once, then answers polynomial and moment queries by direct summation.
class TreeOracle {
 public:
  explicit TreeOracle(const SpnGraph& graph, std::size_t cap = kDefaultTreeCap);

  const std::vector<InducedTree>& trees() const { return trees_; }

  double leaf_product(const InducedTree& tree, const Instance& instance) const;
  TreeTerm term(const InducedTree& tree, const Instance& instance, const DirichletPrior& prior,
                std::span<const double> weights) const;

  /// sum_t w_t c_t.
  double polynomial(std::span<const double> weights, const Instance& instance) const;

  /// Z_x = sum_t c_t u_t.
  double z(const DirichletPrior& prior, const Instance& instance) const;

  /// Sum of c_t u_t over trees containing each edge (product edges too), one pass over trees.
  std::vector<double> edge_masses(const DirichletPrior& prior, const Instance& instance) const;

  double lambda(const DirichletPrior& prior, const Instance& instance, EdgeId edge) const;

  /// Posterior moment of f(w_edge) by splitting trees on whether they contain the edge and
  /// integrating each part against its Dirichlet (exact closed forms).
  double moment(const DirichletPrior& prior, const Instance& instance, EdgeId edge, MomentFunction f) const;

  /// moment() for every sum edge from a single sweep over the trees (product edges hold 0).
  std::vector<double> moments(const DirichletPrior& prior, const Instance& instance, MomentFunction f) const;

 private:
  const SpnGraph* graph_;
  std::vector<InducedTree> trees_;
};

double oracle_polynomial(const SpnGraph& graph, std::span<const double> weights, const Instance& instance,
                         std::size_t cap = kDefaultTreeCap);
double oracle_moment(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance, EdgeId edge,
                     MomentFunction f, std::size_t cap = kDefaultTreeCap);
double oracle_lambda(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance, EdgeId edge,
                     std::size_t cap = kDefaultTreeCap);

/// Closed-form Dirichlet moment, evaluated independently of moments.cpp (log moments go
/// through Boost's digamma).
double dirichlet_moment(double a, double total, MomentFunction f);

struct RandomSpnParams {
  std::uint64_t seed = 1;
  std::uint32_t num_vars = 2;
  std::uint32_t depth = 1;           // sum layers above the univariate sums
  std::uint32_t sum_fanout = 2;
  std::uint32_t product_fanout = 2;
  double dag_merge_probability = 0.0;
  std::uint32_t arity = 2;
};

/// Complete and decomposable SPN by recursive scope partitioning: sum layers alternate with
/// product layers that split the scope into disjoint blocks, bottoming out in sums over a
/// variable's indicator leaves. With probability `dag_merge_probability` a sum over a
/// (scope, level) pair already built is reused, which turns the tree into a DAG. Weights
/// are Dirichlet(1) draws. Deterministic per seed. Throws DomainError when
/// num_vars < 2^(depth-1) or a parameter is zero.
SpnGraph generate_random_spn(const RandomSpnParams& params);

/// Ancestral sample of a full assignment.
Instance sample_instance(const SpnGraph& graph, std::span<const double> weights, std::mt19937_64& rng);

/// Uniform categories; each variable marginalized with probability `missing_probability`.
Instance random_instance(const SpnGraph& graph, std::mt19937_64& rng, double missing_probability = 0.0);

}  // namespace spn::oracle
