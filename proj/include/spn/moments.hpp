#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "spn/graph.hpp"
#include "spn/inference.hpp"

namespace spn {

enum class MomentFunction { Mean, SecondMoment, LogMoment };

MomentFunction parse_moment_function(std::string_view name);  // mean | second | log
const char* moment_function_name(MomentFunction f);

/// Dirichlet means alpha_kj / sum_j' alpha_kj'. Product-edge entries are 1.
EdgeWeights mean_weights(const SpnGraph& graph, const DirichletPrior& prior);

/// Closed-form E[f(w_j)] under Dir(alpha_k), or under Dir(alpha_k + e_j) when incremented.
double prior_moment(std::span<const double> alpha_k, std::size_t j, MomentFunction f, bool incremented);

/// Throws DomainError unless every sum-edge hyperparameter is positive and the shape matches.
void check_prior(const SpnGraph& graph, const DirichletPrior& prior);

/// Fraction of posterior tree mass through each sum edge,
///   lambda_kj = w_kj * V_j * D_k / V_root,
/// from one evaluation and one differentiation pass with the given weights. Product
/// edges hold 0. Throws ZeroEvidenceError when V_root(x;w) = 0.
struct EdgeResponsibilities {
  std::vector<double> lambda;
  CircuitTrace trace;
  LogReal root_value;
};

EdgeResponsibilities edge_responsibilities(const SpnGraph& graph, std::span<const double> weights,
                                           const Instance& instance);

/// lambda at the prior-mean weights.
std::vector<double> compute_lambdas(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance);

/// Reference route: one full evaluation per sum edge, using multilinearity
/// (mass of trees through (k,j) = Z_x - Z_x with w_kj set to 0). Quadratic; for tests and
/// the naive benchmark only.
std::vector<double> compute_lambdas_naive(const SpnGraph& graph, const DirichletPrior& prior,
                                          const Instance& instance, PassCounters* counters = nullptr);

struct EdgeMoment {
  NodeId parent = 0;
  NodeId child = 0;
  std::uint32_t position = 0;
  EdgeId edge = 0;
  double lambda = 0.0;
  double prior_m = 0.0;
  double incr_m = 0.0;
  double posterior_m = 0.0;
};

/// Posterior moments for every sum edge, sorted by (parent, child position).
struct EdgeMomentReport {
  std::vector<EdgeMoment> edges;
  double z_x = 0.0;
  PassCounters counters;
};

EdgeMomentReport compute_moments(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance,
                                 MomentFunction f);

/// Sum_t c_t u_t = V_root(x; mean_weights(prior)).
double z_x(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance);

}  // namespace spn
