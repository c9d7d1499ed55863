#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "spn/errors.hpp"
#include "spn/inference.hpp"
#include "spn/oracle.hpp"

using namespace spn;
using namespace spn::testing;

namespace {

double value(const CircuitTrace& t, NodeId k) { return t.values[k].linear(); }
double deriv(const CircuitTrace& t, NodeId k) { return t.derivs[k].linear(); }

}  // namespace

TEST_CASE("evaluate S2 at x = (0, 1)") {
  const SpnGraph g = s2();
  const CircuitTrace t = evaluate(g, g.weights(), inst({0, 1}));
  CHECK(value(t, 3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(value(t, 4) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(value(t, 5) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(value(t, 1) == doctest::Approx(0.12).epsilon(1e-14));
  CHECK(value(t, 2) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(value(t, 0) == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(t.counters.edge_visits == g.num_edges());
}

TEST_CASE("evaluate S1") {
  const SpnGraph g = s1();
  const CircuitTrace t = evaluate(g, g.weights(), inst({0, 0}));
  CHECK(value(t, 1) == 1.0);
  CHECK(t.values[2].zero);
  CHECK(value(t, 0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(value(evaluate(g, g.weights(), Instance::all_missing(2)), 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("differentiate matches hand derivatives") {
  SUBCASE("S2") {
    const SpnGraph g = s2();
    const CircuitTrace t = evaluate_and_differentiate(g, g.weights(), inst({0, 1}));
    CHECK(deriv(t, 0) == 1.0);
    CHECK(deriv(t, 3) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(deriv(t, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(deriv(t, 4) == doctest::Approx(0.15).epsilon(1e-14));  // 0.5 * V_3
    CHECK(t.counters.edge_visits == 2 * g.num_edges());
  }
  SUBCASE("S1 with a zero-valued branch") {
    const SpnGraph g = s1();
    const CircuitTrace t = evaluate_and_differentiate(g, g.weights(), inst({0, 0}));
    CHECK(deriv(t, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(deriv(t, 2) == doctest::Approx(0.6).epsilon(1e-15));
    // dV/dV_5 = 0.6 * V_6 = 0 and dV/dV_6 = 0.6 * V_5 = 0, but dV/dV_4 = 0.4 * V_3 = 0.4.
    CHECK(t.derivs[5].zero);
    CHECK(deriv(t, 4) == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("product with one zero child keeps the sibling derivative") {
    // V_1 = V_3 * V_4 with V_4 = 0 -> dV_1/dV_4 = V_3 != 0.
    const SpnGraph g = s1();
    const CircuitTrace t = evaluate_and_differentiate(g, g.weights(), inst({0, 1}));
    CHECK(t.values[0].zero);
    CHECK(deriv(t, 4) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(deriv(t, 5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(t.derivs[3].zero);
  }
}

TEST_CASE("derivatives match central finite differences on the circuit") {
  std::mt19937_64 rng(7);
  for (const SpnGraph& g : random_graphs(5)) {
    const Instance x = oracle::random_instance(g, rng, 0.3);
    const CircuitTrace t = evaluate_and_differentiate(g, g.weights(), x);
    const double root = t.root_value(g).linear();
    for (NodeId k : g.sum_nodes())
      for (EdgeId e = g.edge_begin(k); e < g.edge_end(k); ++e) {
        const double h = 1e-6;
        EdgeWeights up = g.weights(), down = g.weights();
        up[e] += h;
        down[e] -= h;
        const double fd = (evaluate(g, up, x).root_value(g).linear() - evaluate(g, down, x).root_value(g).linear()) /
                          (2 * h);
        const double analytic = t.derivs[k].linear() * t.values[g.edge_child(e)].linear();
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-6).scale(root));
      }
  }
}

TEST_CASE("log likelihood") {
  const SpnGraph g = s1();
  CHECK(log_likelihood(g, g.weights(), inst({0, 0})).log == doctest::Approx(std::log(0.4)).epsilon(1e-15));
  CHECK(log_likelihood(g, g.weights(), inst({0, 1})).zero);
  CHECK(log_likelihood(g, g.weights(), Instance::all_missing(2)).log == doctest::Approx(0.0));
  // Unnormalized weights are normalized by the all-missing evaluation.
  EdgeWeights doubled = g.weights();
  for (double& w : doubled) w *= 2;
  CHECK(log_likelihood(g, doubled, inst({0, 0})).log == doctest::Approx(std::log(0.4)).epsilon(1e-14));
}

TEST_CASE("log space survives deep products") {
  // A product of 2000 leaves each weighted 0.5 underflows in linear space.
  std::vector<Node> nodes{Node::product()};
  std::vector<EdgeSpec> edges;
  for (std::uint32_t v = 0; v < 2000; ++v) {
    const NodeId s = static_cast<NodeId>(nodes.size());
    nodes.push_back(Node::sum());
    nodes.push_back(Node::leaf(v, 0));
    nodes.push_back(Node::leaf(v, 1));
    edges.push_back({0, s, std::nullopt});
    edges.push_back({s, s + 1, 0.5});
    edges.push_back({s, s + 2, 0.5});
  }
  const SpnGraph g(nodes, edges);
  Instance x{std::vector<std::int32_t>(2000, 0)};
  const CircuitTrace t = evaluate_and_differentiate(g, g.weights(), x);
  CHECK_FALSE(t.root_value(g).zero);
  CHECK(t.root_value(g).log == doctest::Approx(2000 * std::log(0.5)));
  CHECK(t.derivs[1].log == doctest::Approx(1999 * std::log(0.5)));
}

TEST_CASE("shape mismatches are rejected") {
  const SpnGraph g = s1();
  CHECK_THROWS_AS(evaluate(g, g.weights(), inst({0})), StructureError);
  CHECK_THROWS_AS(evaluate(g, EdgeWeights(3, 1.0), inst({0, 0})), StructureError);
}

TEST_CASE("tree counts") {
  CHECK(count_induced_trees(s1()) == 2);
  CHECK(count_induced_trees(s2()) == 8);
  for (std::uint32_t levels = 1; levels <= 12; ++levels) {
    TreeCount expected = 2;
    for (std::uint32_t i = 1; i < levels; ++i) expected *= 4;
    CHECK(count_induced_trees(ladder(levels)) == expected);
  }
}

TEST_CASE("tree counts do not overflow") {
  // A product of 80 binary sums has 2^80 induced trees.
  std::vector<Node> nodes{Node::product()};
  std::vector<EdgeSpec> edges;
  for (std::uint32_t v = 0; v < 80; ++v) {
    const NodeId s = static_cast<NodeId>(nodes.size());
    nodes.push_back(Node::sum());
    nodes.push_back(Node::leaf(v, 0));
    nodes.push_back(Node::leaf(v, 1));
    edges.push_back({0, s, std::nullopt});
    edges.push_back({s, s + 1, 0.5});
    edges.push_back({s, s + 2, 0.5});
  }
  CHECK(count_induced_trees(SpnGraph(nodes, edges)) == (TreeCount(1) << 80));
}
