#include "spn/moments.hpp"

#include <algorithm>
#include <cmath>

#include "spn/digamma.hpp"
#include "spn/errors.hpp"

namespace spn {

namespace {

constexpr double kLambdaSlack = 1e-12;

double dirichlet_moment(double a, double total, MomentFunction f) {
  switch (f) {
    case MomentFunction::Mean: return a / total;
    case MomentFunction::SecondMoment: return a * (a + 1.0) / (total * (total + 1.0));
    case MomentFunction::LogMoment: return digamma(a) - digamma(total);
  }
  return 0.0;
}

}  // namespace

MomentFunction parse_moment_function(std::string_view name) {
  if (name == "mean") return MomentFunction::Mean;
  if (name == "second") return MomentFunction::SecondMoment;
  if (name == "log") return MomentFunction::LogMoment;
  throw DomainError("unknown moment function '" + std::string(name) + "' (expected mean, second or log)");
}

const char* moment_function_name(MomentFunction f) {
  switch (f) {
    case MomentFunction::Mean: return "mean";
    case MomentFunction::SecondMoment: return "second";
    case MomentFunction::LogMoment: return "log";
  }
  return "?";
}

void check_prior(const SpnGraph& graph, const DirichletPrior& prior) {
  if (prior.alpha.size() != graph.num_edges())
    throw DomainError("prior has " + std::to_string(prior.alpha.size()) + " entries; graph has " +
                      std::to_string(graph.num_edges()) + " edges");
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e)
      if (!(prior.alpha[e] > 0.0) || !std::isfinite(prior.alpha[e]))
        throw DomainError("non-positive hyperparameter on edge " + std::to_string(k) + " -> " +
                          std::to_string(graph.edge_child(e)));
}

EdgeWeights mean_weights(const SpnGraph& graph, const DirichletPrior& prior) {
  EdgeWeights w(graph.num_edges(), 1.0);
  for (NodeId k : graph.sum_nodes()) {
    double total = 0.0;
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) total += prior.alpha[e];
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) w[e] = prior.alpha[e] / total;
  }
  return w;
}

double prior_moment(std::span<const double> alpha_k, std::size_t j, MomentFunction f, bool incremented) {
  double total = 0.0;
  for (double a : alpha_k) total += a;
  const double bump = incremented ? 1.0 : 0.0;
  return dirichlet_moment(alpha_k[j] + bump, total + bump, f);
}

EdgeResponsibilities edge_responsibilities(const SpnGraph& graph, std::span<const double> weights,
                                           const Instance& instance) {
  EdgeResponsibilities out;
  out.trace = evaluate(graph, weights, instance);
  out.root_value = out.trace.root_value(graph);
  if (out.root_value.zero) throw ZeroEvidenceError("instance has zero probability under the given weights");
  differentiate(graph, weights, out.trace);

  const auto& values = out.trace.values;
  const auto& derivs = out.trace.derivs;
  const double log_root = out.root_value.log;
  out.lambda.assign(graph.num_edges(), 0.0);
  for (NodeId k : graph.sum_nodes()) {
    const LogReal dk = derivs[k];
    if (dk.zero) continue;
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
      const LogReal vj = values[graph.edge_child(e)];
      if (vj.zero || !(weights[e] > 0.0)) continue;
      double lambda = std::exp(std::log(weights[e]) + vj.log + dk.log - log_root);
      if (lambda > 1.0 && lambda <= 1.0 + kLambdaSlack) lambda = 1.0;
      out.lambda[e] = lambda;
    }
  }
  return out;
}

std::vector<double> compute_lambdas(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance) {
  check_prior(graph, prior);
  const EdgeWeights w = mean_weights(graph, prior);
  return edge_responsibilities(graph, w, instance).lambda;
}

std::vector<double> compute_lambdas_naive(const SpnGraph& graph, const DirichletPrior& prior,
                                          const Instance& instance, PassCounters* counters) {
  check_prior(graph, prior);
  EdgeWeights w = mean_weights(graph, prior);
  PassCounters local;
  const CircuitTrace full = evaluate(graph, w, instance);
  local += full.counters;
  const LogReal z = full.root_value(graph);
  if (z.zero) throw ZeroEvidenceError("instance has zero probability under the given weights");

  std::vector<double> lambda(graph.num_edges(), 0.0);
  for (NodeId k : graph.sum_nodes()) {
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
      const double saved = w[e];
      w[e] = 0.0;
      const CircuitTrace without = evaluate(graph, w, instance);
      w[e] = saved;
      local += without.counters;
      // Relative to Z_x directly in log space to keep precision when the edge mass is small.
      const LogReal rest = without.root_value(graph);
      const double excluded = rest.zero ? 0.0 : std::exp(rest.log - z.log);
      lambda[e] = std::clamp(1.0 - excluded, 0.0, 1.0);
    }
  }
  if (counters) *counters += local;
  return lambda;
}

EdgeMomentReport compute_moments(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance,
                                 MomentFunction f) {
  check_prior(graph, prior);
  const EdgeWeights w = mean_weights(graph, prior);
  const EdgeResponsibilities resp = edge_responsibilities(graph, w, instance);

  EdgeMomentReport report;
  report.z_x = resp.root_value.linear();
  report.counters = resp.trace.counters;
  std::size_t sum_edges = 0;
  for (NodeId k : graph.sum_nodes()) sum_edges += graph.num_children(k);
  report.edges.reserve(sum_edges);
  for (NodeId k : graph.sum_nodes()) {
    const EdgeId begin = graph.edge_begin(k);
    double total = 0.0;
    for (EdgeId e = begin; e < graph.edge_end(k); ++e) total += prior.alpha[e];
    for (EdgeId e = begin; e < graph.edge_end(k); ++e) {
      EdgeMoment m;
      m.parent = k;
      m.child = graph.edge_child(e);
      m.position = e - begin;
      m.edge = e;
      m.lambda = resp.lambda[e];
      m.prior_m = dirichlet_moment(prior.alpha[e], total, f);
      m.incr_m = dirichlet_moment(prior.alpha[e] + 1.0, total + 1.0, f);
      m.posterior_m = (1.0 - m.lambda) * m.prior_m + m.lambda * m.incr_m;
      report.edges.push_back(m);
    }
  }
  return report;
}

double z_x(const SpnGraph& graph, const DirichletPrior& prior, const Instance& instance) {
  check_prior(graph, prior);
  const EdgeWeights w = mean_weights(graph, prior);
  return evaluate(graph, w, instance).root_value(graph).linear();
}

}  // namespace spn
