#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "spn/errors.hpp"
#include "spn/moments.hpp"
#include "spn/oracle.hpp"

using namespace spn;
using namespace spn::testing;

namespace {

bool contains(const oracle::InducedTree& t, EdgeId e) { return std::binary_search(t.edges.begin(), t.edges.end(), e); }

}  // namespace

TEST_CASE("enumeration of the fixtures") {
  SUBCASE("S1") {
    const SpnGraph g = s1();
    const auto trees = oracle::enumerate_trees(g);
    REQUIRE(trees.size() == 2);
    // Each tree takes one root edge plus both edges of the chosen product.
    for (const auto& t : trees) {
      CHECK(t.edges.size() == 3);
      CHECK(contains(t, g.edge_begin(0)) != contains(t, g.edge_begin(0) + 1));
    }
  }
  SUBCASE("S2") {
    const SpnGraph g = s2();
    const auto trees = oracle::enumerate_trees(g);
    REQUIRE(trees.size() == 8);
    std::set<std::vector<EdgeId>> distinct;
    for (const auto& t : trees) {
      CHECK(contains(t, *g.find_edge(3, 6)) != contains(t, *g.find_edge(3, 7)));
      CHECK(oracle::is_induced_tree(g, t));
      distinct.insert(t.edges);
    }
    CHECK(distinct.size() == 8);
  }
}

TEST_CASE("enumeration agrees with the circuit tree count") {
  for (const SpnGraph& g : random_graphs(20)) {
    const auto trees = oracle::enumerate_trees(g);
    CHECK(TreeCount(trees.size()) == count_induced_trees(g));
    for (const auto& t : trees) CHECK(oracle::is_induced_tree(g, t));
  }
  for (std::uint32_t levels = 1; levels <= 5; ++levels)
    CHECK(TreeCount(oracle::enumerate_trees(ladder(levels)).size()) == count_induced_trees(ladder(levels)));
}

TEST_CASE("enumeration refuses networks above the cap") {
  CHECK_THROWS_AS(oracle::enumerate_trees(ladder(6), 1000), CapExceededError);
  CHECK_THROWS_AS(oracle::TreeOracle(s2(), 7), CapExceededError);
  CHECK_NOTHROW(oracle::TreeOracle(s2(), 8));
}

TEST_CASE("is_induced_tree rejects partial selections") {
  const SpnGraph g = s2();
  auto t = oracle::enumerate_trees(g).front();
  t.edges.pop_back();
  CHECK_FALSE(oracle::is_induced_tree(g, t));
}

TEST_CASE("oracle polynomial examples") {
  CHECK(oracle::oracle_polynomial(s1(), s1().weights(), inst({0, 0})) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(oracle::oracle_polynomial(s2(), s2().weights(), inst({0, 1})) == doctest::Approx(0.18).epsilon(1e-14));
}

TEST_CASE("oracle polynomial equals circuit evaluation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (const SpnGraph& g : random_graphs(15)) {
    const oracle::TreeOracle o(g);
    for (int i = 0; i < 5; ++i) {
      // Unnormalized weights: the polynomial identity does not need local normalization.
      EdgeWeights w = g.weights();
      for (NodeId k : g.sum_nodes())
        for (EdgeId e = g.edge_begin(k); e < g.edge_end(k); ++e) w[e] = u(rng);
      const Instance x = oracle::random_instance(g, rng, 0.3);
      CHECK(evaluate(g, w, x).root_value(g).linear() == doctest::Approx(o.polynomial(w, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("oracle lambda and moments match the circuit route") {
  std::mt19937_64 rng(9);
  for (const SpnGraph& g : random_graphs(10)) {
    const oracle::TreeOracle o(g);
    const DirichletPrior prior = uniform_prior(g);
    const Instance x = oracle::random_instance(g, rng, 0.3);
    if (o.z(prior, x) == 0.0) continue;
    const auto lambda = compute_lambdas(g, prior, x);
    CHECK(z_x(g, prior, x) == doctest::Approx(o.z(prior, x)).epsilon(1e-12));
    for (MomentFunction f : {MomentFunction::Mean, MomentFunction::SecondMoment, MomentFunction::LogMoment}) {
      const auto swept = o.moments(prior, x, f);
      for (const EdgeMoment& m : compute_moments(g, prior, x, f).edges) {
        CHECK(m.posterior_m == doctest::Approx(swept[m.edge]).epsilon(1e-9));
        CHECK(o.moment(prior, x, m.edge, f) == doctest::Approx(swept[m.edge]).epsilon(1e-12));
      }
    }
    for (NodeId k : g.sum_nodes())
      for (EdgeId e = g.edge_begin(k); e < g.edge_end(k); ++e)
        CHECK(lambda[e] == doctest::Approx(o.lambda(prior, x, e)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("ancestral samples have nonzero probability") {
  std::mt19937_64 rng(1);
  for (const SpnGraph& g : random_graphs(5)) {
    for (int i = 0; i < 20; ++i) {
      const Instance x = oracle::sample_instance(g, g.weights(), rng);
      CHECK(std::none_of(x.values.begin(), x.values.end(), [](std::int32_t v) { return v == Instance::kMissing; }));
      CHECK_FALSE(evaluate(g, g.weights(), x).root_value(g).zero);
    }
  }
}
