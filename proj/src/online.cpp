#include "spn/online.hpp"

#include <cmath>
#include <limits>

#include "spn/errors.hpp"
#include "spn/moments.hpp"

namespace spn {

namespace {

// Per sum node: out = values / sum(values) when the sum is positive, else fallback.
EdgeWeights normalize_per_node(const SpnGraph& graph, std::span<const double> values,
                               std::span<const double> fallback) {
  EdgeWeights out(fallback.begin(), fallback.end());
  for (NodeId k : graph.sum_nodes()) {
    double total = 0.0;
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) total += values[e];
    if (!(total > 0.0)) continue;
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) out[e] = values[e] / total;
  }
  return out;
}

void check_dirichlet_state(const SpnGraph& graph, const DirichletState& state) {
  if (state.concentration.size() != graph.num_nodes())
    throw DomainError("learner state does not match the graph");
  check_prior(graph, state.prior);
}

// Replaces node k's hyperparameters with mean * (A_k + 1), given unnormalized mean scores.
void absorb(const SpnGraph& graph, DirichletState& next, NodeId k, std::span<const double> scores) {
  double total = 0.0;
  for (double s : scores) total += s;
  next.concentration[k] += 1.0;
  const double a = next.concentration[k];
  for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e)
    next.prior.alpha[e] = scores[e - graph.edge_begin(k)] / total * a;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "adf") return Algorithm::Adf;
  if (name == "bmm") return Algorithm::Bmm;
  if (name == "cccp") return Algorithm::Cccp;
  throw DomainError("unknown algorithm '" + std::string(name) + "' (expected adf, bmm or cccp)");
}

const char* algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Adf: return "adf";
    case Algorithm::Bmm: return "bmm";
    case Algorithm::Cccp: return "cccp";
  }
  return "?";
}

DirichletState make_dirichlet_state(const SpnGraph& graph, const DirichletPrior& prior) {
  check_prior(graph, prior);
  DirichletState state;
  state.prior = prior;
  state.concentration.assign(graph.num_nodes(), 0.0);
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) state.concentration[k] += prior.alpha[e];
  return state;
}

DirichletState make_adf_state(const SpnGraph& graph, const DirichletPrior& prior) {
  DirichletState state = make_dirichlet_state(graph, prior);
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e)
      if (!(prior.alpha[e] > 0.5))
        throw DomainError("ADF requires every hyperparameter > 1/2; edge " + std::to_string(k) + " -> " +
                          std::to_string(graph.edge_child(e)) + " has " + std::to_string(prior.alpha[e]));
  return state;
}

WeightState make_weight_state(const SpnGraph& graph, const EdgeWeights& weights, double pseudocount) {
  if (weights.size() != graph.num_edges()) throw DomainError("weight vector does not match the graph");
  if (!(pseudocount >= 0.0)) throw DomainError("pseudocount must be non-negative");
  WeightState state;
  state.weights = weights;
  state.counts.assign(graph.num_edges(), 0.0);
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) state.counts[e] = pseudocount * weights[e];
  return state;
}

DirichletState adf_step(const DirichletState& state, const SpnGraph& graph, const Instance& instance) {
  check_dirichlet_state(graph, state);
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e)
      if (!(state.prior.alpha[e] > 0.5))
        throw DomainError("ADF requires every hyperparameter > 1/2; edge " + std::to_string(k) + " -> " +
                          std::to_string(graph.edge_child(e)) + " has " + std::to_string(state.prior.alpha[e]));

  const std::vector<double> lambda = compute_lambdas(graph, state.prior, instance);
  DirichletState next = state;
  std::vector<double> r;
  for (NodeId k : graph.sum_nodes()) {
    const double a_k = state.concentration[k];
    r.clear();
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
      const double a = state.prior.alpha[e];
      const double l = lambda[e];
      r.push_back(std::exp((1.0 - l) * std::log((a - 0.5) / (a_k - 0.5)) + l * std::log((a + 0.5) / (a_k + 0.5))));
    }
    // The moment-matching equation fixes the ratios (beta_j - 1/2) / (B - 1/2) up to a
    // common factor; with B = A_k + 1 the shifted hyperparameters share B - K/2.
    double total = 0.0;
    for (double v : r) total += v;
    next.concentration[k] += 1.0;
    const double shifted = next.concentration[k] - 0.5 * static_cast<double>(r.size());
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e)
      next.prior.alpha[e] = 0.5 + r[e - graph.edge_begin(k)] / total * shifted;
  }
  ++next.step_count;
  return next;
}

DirichletState bmm_step(const DirichletState& state, const SpnGraph& graph, const Instance& instance) {
  check_dirichlet_state(graph, state);
  const std::vector<double> lambda = compute_lambdas(graph, state.prior, instance);
  DirichletState next = state;
  std::vector<double> m;
  for (NodeId k : graph.sum_nodes()) {
    const double a_k = state.concentration[k];
    m.clear();
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
      const double a = state.prior.alpha[e];
      const double l = lambda[e];
      m.push_back((1.0 - l) * (a / a_k) + l * ((a + 1.0) / (a_k + 1.0)));
    }
    absorb(graph, next, k, m);
  }
  ++next.step_count;
  return next;
}

EdgeWeights cccp_step(std::span<const double> weights, const SpnGraph& graph, const Instance& instance) {
  const EdgeResponsibilities resp = edge_responsibilities(graph, weights, instance);
  return normalize_per_node(graph, resp.lambda, weights);
}

WeightState cccp_online_step(const WeightState& state, const SpnGraph& graph, const Instance& instance) {
  const EdgeResponsibilities resp = edge_responsibilities(graph, state.weights, instance);
  WeightState next = state;
  for (NodeId k : graph.sum_nodes())
    for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) next.counts[e] += resp.lambda[e];
  next.weights = normalize_per_node(graph, next.counts, state.weights);
  ++next.step_count;
  return next;
}

EdgeWeights predictive_weights(const SpnGraph& graph, const LearnerState& state) {
  if (const auto* d = std::get_if<DirichletState>(&state)) return mean_weights(graph, d->prior);
  return std::get<WeightState>(state).weights;
}

TrainResult train(const SpnGraph& graph, LearnerState initial, std::span<const Instance> stream, Algorithm algo,
                  const TrainOptions& options) {
  const bool wants_dirichlet = algo != Algorithm::Cccp;
  if (wants_dirichlet != std::holds_alternative<DirichletState>(initial))
    throw DomainError(std::string(algorithm_name(algo)) + " needs a " +
                      (wants_dirichlet ? "Dirichlet" : "weight") + " learner state");
  if (algo == Algorithm::Adf) initial = make_adf_state(graph, std::get<DirichletState>(initial).prior);

  TrainResult result{std::move(initial), {}};
  auto& log = result.log;
  log.log_likelihood.reserve(stream.size());
  log.running_avg.reserve(stream.size());
  double sum = 0.0;
  std::size_t counted = 0;

  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Instance& x = stream[i];
    const EdgeWeights w = predictive_weights(graph, result.state);
    const LogReal ll = log_likelihood(graph, w, x);
    log.log_likelihood.push_back(ll.log_or_neg_inf());
    if (ll.zero) {
      if (options.abort_on_zero_evidence)
        throw ZeroEvidenceError("row " + std::to_string(i + 1) + " has zero probability under the current model");
      log.skipped.push_back(i);
    } else {
      sum += ll.log;
      ++counted;
      switch (algo) {
        case Algorithm::Adf:
          result.state = adf_step(std::get<DirichletState>(result.state), graph, x);
          break;
        case Algorithm::Bmm:
          result.state = bmm_step(std::get<DirichletState>(result.state), graph, x);
          break;
        case Algorithm::Cccp:
          result.state = cccp_online_step(std::get<WeightState>(result.state), graph, x);
          break;
      }
    }
    log.running_avg.push_back(counted ? sum / static_cast<double>(counted)
                                      : -std::numeric_limits<double>::infinity());
  }
  return result;
}

}  // namespace spn
