#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "spn/graph.hpp"
#include "spn/inference.hpp"

namespace spn {

enum class Algorithm { Adf, Bmm, Cccp };

Algorithm parse_algorithm(std::string_view name);  // adf | bmm | cccp
const char* algorithm_name(Algorithm algo);

/// Factorized Dirichlet belief used by ADF and BMM. `concentration[k]` = sum_j alpha_kj
/// for sum nodes (0 elsewhere) and grows by exactly one per absorbed observation.
struct DirichletState {
  DirichletPrior prior;
  std::vector<double> concentration;
  std::size_t step_count = 0;
};

/// Point estimate used by CCCP. `counts` accumulates lambda across the stream and seeds
/// from `pseudocount * weights`; weights are the per-node normalized counts.
struct WeightState {
  EdgeWeights weights;
  EdgeWeights counts;
  std::size_t step_count = 0;
};

using LearnerState = std::variant<DirichletState, WeightState>;

/// Throws DomainError on non-positive hyperparameters.
DirichletState make_dirichlet_state(const SpnGraph& graph, const DirichletPrior& prior);
/// As make_dirichlet_state, and additionally requires every alpha > 1/2 (the range where
/// exp(psi(a)) ~ a - 1/2 is used by ADF).
DirichletState make_adf_state(const SpnGraph& graph, const DirichletPrior& prior);
WeightState make_weight_state(const SpnGraph& graph, const EdgeWeights& weights, double pseudocount = 0.0);

/// Assumed density filtering: matches E[log w] using exp(psi(a)) ~ a - 1/2. The shifted
/// hyperparameters beta_j - 1/2 are set proportional to the lambda-weighted geometric mean
/// r_j of (a_j - 1/2)/(A - 1/2) and (a_j + 1/2)/(A + 1/2), with sum_j beta_j = A + 1, so
/// every beta_j stays above 1/2.
DirichletState adf_step(const DirichletState& state, const SpnGraph& graph, const Instance& instance);

/// Bayesian moment matching: new mean proportional to the lambda-weighted arithmetic mean
/// of the prior and one-pseudo-count means.
DirichletState bmm_step(const DirichletState& state, const SpnGraph& graph, const Instance& instance);

/// w'_k = lambda_k / sum_j lambda_kj computed at the given weights. Sum nodes that receive
/// no posterior mass keep their weights.
EdgeWeights cccp_step(std::span<const double> weights, const SpnGraph& graph, const Instance& instance);

/// Online CCCP: counts += lambda(current weights), weights = normalized counts.
WeightState cccp_online_step(const WeightState& state, const SpnGraph& graph, const Instance& instance);

struct TrainLog {
  std::vector<double> log_likelihood;  // predictive, before the update; -inf on zero evidence
  std::vector<double> running_avg;     // mean over the non-skipped rows so far
  std::vector<std::size_t> skipped;    // 0-based indices of zero-evidence rows
};

struct TrainOptions {
  bool abort_on_zero_evidence = false;
};

struct TrainResult {
  LearnerState state;
  TrainLog log;
};

/// Runs the chosen learner over the stream in order. ADF/BMM need a DirichletState, CCCP a
/// WeightState. Zero-evidence rows are logged and skipped, or rethrown when configured.
TrainResult train(const SpnGraph& graph, LearnerState initial, std::span<const Instance> stream, Algorithm algo,
                  const TrainOptions& options = {});

/// Weights at which the state predicts: Dirichlet means or the point estimate.
EdgeWeights predictive_weights(const SpnGraph& graph, const LearnerState& state);

}  // namespace spn
