#include <doctest.h>

#include <algorithm>
#include <string>

#include "fixtures.hpp"
#include "spn/errors.hpp"
#include "spn/graph.hpp"
#include "spn/io.hpp"

using namespace spn;
using namespace spn::testing;

namespace {

bool has_violation(const ValidationReport& r, Check c, NodeId node) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.check == c && v.node == node; });
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("fixtures parse into the expected shapes") {
  const SpnGraph g1 = s1();
  CHECK(g1.num_nodes() == 7);
  CHECK(g1.num_edges() == 6);
  CHECK(g1.root() == 0);
  CHECK(g1.weights()[g1.edge_begin(0)] == doctest::Approx(0.4));
  CHECK(g1.weights()[g1.edge_begin(0) + 1] == doctest::Approx(0.6));

  const SpnGraph g2 = s2();
  CHECK(g2.num_nodes() == 10);
  CHECK(g2.num_parents(3) == 2);
  CHECK(g2.find_edge(1, 3).has_value());
  CHECK(g2.find_edge(2, 3).has_value());
  CHECK(g2.num_vars() == 2);
  CHECK(g2.arities()[0] == 2);
}

TEST_CASE("validate accepts both fixtures and reports scopes") {
  const SpnGraph g1 = s1();
  const ValidationReport r1 = validate(g1);
  CHECK(r1.ok());
  CHECK(r1.scopes[0] == std::vector<std::uint32_t>{0, 1});

  const SpnGraph g2 = s2();
  const ValidationReport r2 = validate(g2);
  CHECK(r2.ok());
  CHECK(r2.scopes[3] == std::vector<std::uint32_t>{0});
  CHECK_NOTHROW(require_valid(g2));
}

TEST_CASE("validate rejects the canonical corruptions") {
  SUBCASE("cycle") {
    // Product 1 gains an edge back to the root.
    const SpnGraph g = parse_model(std::string(kS1Text) + "edge 1 0\n");
    const ValidationReport r = validate(g);
    CHECK_FALSE(r.passed(Check::Acyclic));
    CHECK_THROWS_AS(g.topo_order(), StructureError);
    CHECK_THROWS_AS(require_valid(g), StructureError);
  }
  SUBCASE("overlapping scopes under a product") {
    // Leaf 6 (X1 = 1) added under product 1 next to leaf 4 (X1 = 0).
    const SpnGraph g = parse_model(std::string(kS1Text) + "edge 1 6\n");
    const ValidationReport r = validate(g);
    CHECK_FALSE(r.passed(Check::Decomposable));
    CHECK(has_violation(r, Check::Decomposable, 1));
  }
  SUBCASE("scope mismatch under a sum") {
    // Product 2 loses its X1 leaf, so the root mixes {0,1} with {0}.
    const SpnGraph g = parse_model(replace(kS1Text, "edge 2 6\n", ""));
    const ValidationReport r = validate(g);
    CHECK_FALSE(r.passed(Check::Complete));
    CHECK(has_violation(r, Check::Complete, 0));
  }
}

TEST_CASE("validate reports other structural defects") {
  SUBCASE("unnormalized weights") {
    const SpnGraph g = parse_model(replace(kS1Text, "edge 0 2 0.6", "edge 0 2 0.5"));
    CHECK(has_violation(validate(g), Check::Normalized, 0));
  }
  SUBCASE("two roots") {
    const SpnGraph g = parse_model(std::string(kS1Text) + "node 7 sum\nedge 7 1 1\n");
    CHECK_FALSE(validate(g).passed(Check::SingleRoot));
    CHECK_THROWS_AS(g.root(), StructureError);
  }
  SUBCASE("childless internal node") {
    const SpnGraph g = parse_model("node 0 prod\nnode 1 sum\nnode 2 leaf 0 0\nedge 0 1\nedge 0 2\n");
    CHECK_FALSE(validate(g).passed(Check::ChildCount));
  }
  SUBCASE("leaf value outside declared arity") {
    const SpnGraph g = parse_model("vars 1\nnode 0 sum\nnode 1 leaf 0 0\nnode 2 leaf 1 0\nedge 0 1 0.5\nedge 0 2 0.5\n");
    CHECK_FALSE(validate(g).passed(Check::Arity));
  }
}

TEST_CASE("topological order places children first") {
  const SpnGraph g = s1();
  const std::vector<NodeId> order = topological_order(g);
  REQUIRE(order.size() == 7);
  auto pos = [&](NodeId id) { return std::find(order.begin(), order.end(), id) - order.begin(); };
  for (NodeId leaf : {3u, 4u, 5u, 6u})
    for (NodeId prod : {1u, 2u}) CHECK(pos(leaf) < pos(prod));
  CHECK(pos(1) < pos(0));
  CHECK(pos(2) < pos(0));
  CHECK(order.back() == 0);
}

TEST_CASE("topological order respects every edge on random DAGs") {
  for (const SpnGraph& g : random_graphs(10)) {
    const std::vector<NodeId> order = topological_order(g);
    std::vector<std::size_t> pos(g.num_nodes());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (EdgeId e = 0; e < g.num_edges(); ++e) CHECK(pos[g.edge_child(e)] < pos[g.edge_parent(e)]);
  }
}

TEST_CASE("construction rejects malformed edges") {
  std::vector<Node> nodes{Node::sum(), Node::leaf(0, 0), Node::leaf(0, 1)};
  CHECK_THROWS_AS(SpnGraph(nodes, {{0, 1, 0.5}, {0, 5, 0.5}}), StructureError);
  CHECK_THROWS_AS(SpnGraph(nodes, {{0, 1, 0.5}, {0, 2, std::nullopt}}), StructureError);
  CHECK_THROWS_AS(SpnGraph(nodes, {{0, 1, 0.5}, {0, 1, 0.5}}), StructureError);
  CHECK_THROWS_AS(SpnGraph(nodes, {{1, 2, std::nullopt}}), StructureError);
}

TEST_CASE("random generator yields valid, deterministic networks") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    oracle::RandomSpnParams p;
    p.seed = seed;
    p.num_vars = 4;
    p.depth = 3;
    p.dag_merge_probability = 0.5;
    const SpnGraph a = oracle::generate_random_spn(p);
    const SpnGraph b = oracle::generate_random_spn(p);
    CHECK(a == b);
    CHECK(validate(a).ok());
    CHECK(a.root() == 0);
  }
  oracle::RandomSpnParams bad;
  bad.num_vars = 2;
  bad.depth = 3;
  CHECK_THROWS_AS(oracle::generate_random_spn(bad), DomainError);
}

TEST_CASE("merge probability zero yields a tree") {
  oracle::RandomSpnParams p;
  p.num_vars = 4;
  p.depth = 2;
  const SpnGraph g = oracle::generate_random_spn(p);
  for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(g.num_parents(v) <= 1);
}

TEST_CASE("ladder fixture is valid") {
  for (std::uint32_t levels : {1u, 2u, 5u, 12u}) {
    const SpnGraph g = ladder(levels);
    INFO("levels " << levels);
    CHECK(validate(g).ok());
    CHECK(g.num_vars() == levels);
  }
}
