#pragma once

// Shared networks for the unit and acceptance tests: the two hand-sized models, a deep
// "ladder" with a closed-form tree count, and a seeded stream of small random DAGs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spn/graph.hpp"
#include "spn/inference.hpp"
#include "spn/io.hpp"
#include "spn/oracle.hpp"

namespace spn::testing {

// Sum root over two products, each a pair of indicator leaves.
inline constexpr const char* kS1Text = R"(# two-component mixture over X0, X1
node 0 sum
node 1 prod
node 2 prod
node 3 leaf 0 0
node 4 leaf 1 0
node 5 leaf 0 1
node 6 leaf 1 1
edge 0 1 0.4
edge 0 2 0.6
edge 1 3
edge 1 4
edge 2 5
edge 2 6
)";

// DAG: sum node 3 over X0 is shared by both products.
inline constexpr const char* kS2Text = R"(node 0 sum
node 1 prod
node 2 prod
node 3 sum
node 4 sum
node 5 sum
node 6 leaf 0 0
node 7 leaf 0 1
node 8 leaf 1 0
node 9 leaf 1 1
edge 0 1 0.5
edge 0 2 0.5
edge 1 3
edge 1 4
edge 2 3
edge 2 5
edge 3 6 0.3
edge 3 7 0.7
edge 4 8 0.6
edge 4 9 0.4
edge 5 8 0.2
edge 5 9 0.8
)";

inline SpnGraph s1() { return parse_model(kS1Text); }
inline SpnGraph s2() { return parse_model(kS2Text); }

inline Instance inst(std::initializer_list<std::int32_t> values) { return Instance{std::vector<std::int32_t>(values)}; }

/// Ladder with `levels` sum layers over variables X0..X{levels-1}. Level 0 holds two sums
/// A0, B0 over X0's leaves. Level i > 0 holds a univariate sum U_i over X_i and two sums
/// A_i, B_i, each mixing the products A_{i-1} x U_i and B_{i-1} x U_i (shared across A_i and
/// B_i). The root is A_{levels-1}; it has 2 * 4^(levels-1) induced trees and height
/// 2 * levels - 1.
inline SpnGraph ladder(std::uint32_t levels) {
  std::vector<Node> nodes;
  std::vector<EdgeSpec> edges;
  auto add = [&](Node n) {
    nodes.push_back(n);
    return static_cast<NodeId>(nodes.size() - 1);
  };
  auto univariate = [&](std::uint32_t var, double w0) {
    const NodeId s = add(Node::sum());
    const NodeId l0 = add(Node::leaf(var, 0));
    const NodeId l1 = add(Node::leaf(var, 1));
    edges.push_back({s, l0, w0});
    edges.push_back({s, l1, 1.0 - w0});
    return s;
  };
  NodeId a = univariate(0, 0.3);
  NodeId b = univariate(0, 0.8);
  for (std::uint32_t i = 1; i < levels; ++i) {
    const NodeId u = univariate(i, 0.25 + 0.5 * (i % 2));
    const NodeId pa = add(Node::product());
    const NodeId pb = add(Node::product());
    edges.push_back({pa, a, std::nullopt});
    edges.push_back({pa, u, std::nullopt});
    edges.push_back({pb, b, std::nullopt});
    edges.push_back({pb, u, std::nullopt});
    const NodeId next_a = add(Node::sum());
    edges.push_back({next_a, pa, 0.6});
    edges.push_back({next_a, pb, 0.4});
    if (i + 1 < levels) {
      const NodeId next_b = add(Node::sum());
      edges.push_back({next_b, pa, 0.35});
      edges.push_back({next_b, pb, 0.65});
      b = next_b;
    }
    a = next_a;
  }
  if (levels == 1) {
    // A single level keeps only A0 as the root.
    std::vector<Node> kept(nodes.begin(), nodes.begin() + 3);
    std::vector<EdgeSpec> kept_edges(edges.begin(), edges.begin() + 2);
    return SpnGraph(std::move(kept), kept_edges);
  }
  return SpnGraph(std::move(nodes), edges);
}

/// Seeded small random DAGs (merge probability 0.5) whose tree count lies in [2, max_trees].
/// Deterministic for a given `first_seed`.
inline std::vector<SpnGraph> random_graphs(std::size_t count, std::uint64_t first_seed = 1,
                                           std::uint64_t max_trees = 5000) {
  std::vector<SpnGraph> out;
  for (std::uint64_t seed = first_seed; out.size() < count; ++seed) {
    oracle::RandomSpnParams p;
    p.seed = seed;
    p.num_vars = 2 + static_cast<std::uint32_t>(seed % 4);
    p.depth = 1 + static_cast<std::uint32_t>((seed / 4) % 3);
    p.sum_fanout = 2 + static_cast<std::uint32_t>((seed / 12) % 2);
    p.product_fanout = 2;
    p.dag_merge_probability = 0.5;
    p.arity = 2 + static_cast<std::uint32_t>((seed / 24) % 2);
    if (p.num_vars < (1u << (p.depth - 1))) continue;  // too few variables to split that deep
    SpnGraph g = oracle::generate_random_spn(p);
    const TreeCount trees = count_induced_trees(g);
    if (trees >= 2 && trees <= max_trees) out.push_back(std::move(g));
  }
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("spn-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace spn::testing
