#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "spn/batch.hpp"
#include "spn/errors.hpp"
#include "spn/inference.hpp"
#include "spn/io.hpp"
#include "spn/moments.hpp"
#include "spn/online.hpp"
#include "spn/oracle.hpp"
#include "spn/scaling.hpp"

namespace spn::cli {

namespace {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

SpnGraph load_model(const std::string& path) { return parse_model(read_file(path)); }

// Prints the first violations and returns false when the model is unusable.
bool check_model(const SpnGraph& graph, std::ostream& err) {
  const ValidationReport report = validate(graph);
  if (report.ok()) return true;
  err << "invalid model:\n";
  for (const auto& v : report.violations) err << "  " << check_name(v.check) << ": " << v.message << '\n';
  return false;
}

int cmd_validate(const std::string& model_path, Streams io) {
  const SpnGraph graph = load_model(model_path);
  const ValidationReport report = validate(graph);
  for (Check c : {Check::Acyclic, Check::SingleRoot, Check::Reachable, Check::Arity, Check::ChildCount,
                  Check::Complete, Check::Decomposable, Check::Normalized})
    io.out << check_name(c) << ": " << (report.passed(c) ? "pass" : "FAIL") << '\n';
  for (const auto& v : report.violations) io.out << "violation " << check_name(v.check) << ": " << v.message << '\n';
  if (!report.scopes.empty() && graph.roots().size() == 1) {
    io.out << "root scope: {";
    const auto& scope = report.scopes[graph.roots().front()];
    for (std::size_t i = 0; i < scope.size(); ++i) io.out << (i ? ", " : "") << scope[i];
    io.out << "}\n";
  }
  io.out << "nodes: " << graph.num_nodes() << ", edges: " << graph.num_edges() << ", vars: " << graph.num_vars()
         << '\n';
  io.out << (report.ok() ? "valid" : "invalid") << '\n';
  return report.ok() ? kExitOk : kExitDomain;
}

int cmd_count_trees(const std::string& model_path, Streams io) {
  const SpnGraph graph = load_model(model_path);
  if (!check_model(graph, io.err)) return kExitDomain;
  io.out << count_induced_trees(graph) << '\n';
  return kExitOk;
}

int cmd_infer(const std::string& model_path, const std::string& data_path, Streams io) {
  const SpnGraph graph = load_model(model_path);
  if (!check_model(graph, io.err)) return kExitDomain;
  const std::vector<Instance> rows = parse_data(read_file(data_path), graph);
  for (const LogReal& ll : batch_log_likelihood(graph, graph.weights(), rows))
    io.out << format_number(ll.log_or_neg_inf()) << '\n';
  return kExitOk;
}

int cmd_moments(const std::string& model_path, const std::string& prior_path, const std::string& row,
                const std::string& function, Streams io) {
  const SpnGraph graph = load_model(model_path);
  if (!check_model(graph, io.err)) return kExitDomain;
  const DirichletPrior prior = parse_prior(read_file(prior_path), graph);
  const Instance x = parse_instance(row, graph);
  const MomentFunction f = parse_moment_function(function);
  EdgeMomentReport report;
  try {
    report = compute_moments(graph, prior, x, f);
  } catch (const ZeroEvidenceError&) {
    io.err << "instance has zero probability under prior-mean weights\n";
    return kExitDomain;
  }
  io.out << "parent_id\tchild_id\tlambda\tprior_moment\tincremented_moment\tposterior_moment\n";
  for (const EdgeMoment& m : report.edges)
    io.out << m.parent << '\t' << m.child << '\t' << format_number(m.lambda) << '\t' << format_number(m.prior_m)
           << '\t' << format_number(m.incr_m) << '\t' << format_number(m.posterior_m) << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string model, prior, data, algo, out_model, out_prior, log;
  bool abort_on_zero = false;
  double cccp_pseudocount = 0.0;
};

int cmd_train(const TrainArgs& args, Streams io) {
  const SpnGraph graph = load_model(args.model);
  if (!check_model(graph, io.err)) return kExitDomain;
  const Algorithm algo = parse_algorithm(args.algo);
  const std::vector<Instance> rows = parse_data(read_file(args.data), graph);

  LearnerState initial;
  if (algo == Algorithm::Cccp) {
    initial = make_weight_state(graph, graph.weights(), args.cccp_pseudocount);
  } else {
    const DirichletPrior prior =
        args.prior.empty() ? uniform_prior(graph) : parse_prior(read_file(args.prior), graph);
    initial = algo == Algorithm::Adf ? make_adf_state(graph, prior) : make_dirichlet_state(graph, prior);
  }

  const TrainResult result = train(graph, std::move(initial), rows, algo, {args.abort_on_zero});
  const EdgeWeights weights = predictive_weights(graph, result.state);
  if (!args.out_model.empty()) write_file(args.out_model, serialize_model(graph.with_weights(weights)));
  if (!args.out_prior.empty()) {
    if (const auto* d = std::get_if<DirichletState>(&result.state))
      write_file(args.out_prior, serialize_prior(graph, d->prior));
    else
      io.err << "note: --out-prior ignored for cccp (no Dirichlet state)\n";
  }
  if (!args.log.empty()) {
    std::ostringstream csv;
    csv << "step,log_likelihood,running_avg\n";
    for (std::size_t i = 0; i < result.log.log_likelihood.size(); ++i)
      csv << i + 1 << ',' << format_number(result.log.log_likelihood[i]) << ','
          << format_number(result.log.running_avg[i]) << '\n';
    write_file(args.log, csv.str());
  }
  io.out << "algo: " << algorithm_name(algo) << ", rows: " << rows.size()
         << ", skipped: " << result.log.skipped.size();
  if (!result.log.running_avg.empty()) io.out << ", mean log-likelihood: " << format_number(result.log.running_avg.back());
  io.out << '\n';
  return kExitOk;
}

int cmd_bench(const BenchOptions& options, const std::string& csv_path, Streams io) {
  const BenchReport report = run_bench(options);
  std::ostringstream csv;
  csv << "mode,target_edges,edges,nodes,seconds_per_query,ns_per_edge,edge_visits\n";
  auto emit = [&](const BenchRow& r) {
    csv << (r.naive ? "naive" : "linear") << ',' << r.target_edges << ',' << r.edges << ',' << r.nodes << ','
        << format_number(r.seconds_per_query) << ',' << format_number(r.ns_per_edge) << ',' << r.edge_visits << '\n';
  };
  for (const auto& r : report.rows) emit(r);
  for (const auto& r : report.naive_rows) emit(r);
  if (!csv_path.empty()) write_file(csv_path, csv.str());
  io.out << csv.str();
  io.out << "# slope_ns_per_edge " << format_number(report.slope_ns_per_edge) << '\n';
  io.out << "# time_per_edge_ratio " << format_number(report.time_per_edge_ratio) << '\n';
  if (options.naive) io.out << "# naive_growth " << format_number(report.naive_growth) << '\n';
  return kExitOk;
}

double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), std::abs(got));
  return scale == 0.0 ? 0.0 : std::abs(got - want) / scale;
}

int cmd_oracle_check(const std::string& model_path, const std::string& prior_path, const std::string& data_path,
                     std::size_t cap, Streams io) {
  const SpnGraph graph = load_model(model_path);
  if (!check_model(graph, io.err)) return kExitDomain;
  const DirichletPrior prior = prior_path.empty() ? uniform_prior(graph) : parse_prior(read_file(prior_path), graph);
  const std::vector<Instance> rows = parse_data(read_file(data_path), graph);
  const oracle::TreeOracle oracle(graph, cap);
  const EdgeWeights mean_w = mean_weights(graph, prior);

  struct Tally {
    const char* name;
    double tolerance;
    double worst = 0.0;
    std::size_t count = 0;
  };
  Tally count{"tree-count", 0.0}, poly{"polynomial", 1e-12}, lambda_mass{"lambda-edge-mass", 1e-9},
      lambda_range{"lambda-range", 1e-12}, mean{"moment-mean", 1e-9}, second{"moment-second", 1e-9},
      logm{"moment-log", 1e-9};

  count.worst = count_induced_trees(graph) == oracle.trees().size() ? 0.0 : 1.0;
  count.count = 1;
  std::size_t zero_rows = 0;
  for (const Instance& x : rows) {
    for (const auto* w : {&graph.weights(), &mean_w}) {
      const double circuit = evaluate(graph, *w, x).root_value(graph).linear();
      poly.worst = std::max(poly.worst, rel_err(circuit, oracle.polynomial(*w, x)));
      ++poly.count;
    }
    const double z = oracle.z(prior, x);
    if (z == 0.0) {
      ++zero_rows;
      continue;
    }
    const auto masses = oracle.edge_masses(prior, x);
    const auto lambda = compute_lambdas(graph, prior, x);
    const double z_circuit = z_x(graph, prior, x);
    for (NodeId k : graph.sum_nodes())
      for (EdgeId e = graph.edge_begin(k); e < graph.edge_end(k); ++e) {
        lambda_mass.worst = std::max(lambda_mass.worst, rel_err(lambda[e] * z_circuit, masses[e]));
        lambda_range.worst = std::max({lambda_range.worst, -lambda[e], lambda[e] - 1.0});
        ++lambda_mass.count;
        ++lambda_range.count;
      }
    for (auto [tally, f] : {std::pair{&mean, MomentFunction::Mean}, std::pair{&second, MomentFunction::SecondMoment},
                            std::pair{&logm, MomentFunction::LogMoment}}) {
      const auto expected = oracle.moments(prior, x, f);
      for (const EdgeMoment& m : compute_moments(graph, prior, x, f).edges) {
        const double err = f == MomentFunction::LogMoment ? std::abs(m.posterior_m - expected[m.edge])
                                                          : rel_err(m.posterior_m, expected[m.edge]);
        tally->worst = std::max(tally->worst, err);
        ++tally->count;
      }
    }
  }

  bool ok = true;
  io.out << "trees: " << oracle.trees().size() << ", rows: " << rows.size() << ", zero-evidence rows: " << zero_rows
         << '\n';
  for (const Tally* t : {&count, &poly, &lambda_mass, &lambda_range, &mean, &second, &logm}) {
    const bool pass = t->worst <= t->tolerance;
    ok = ok && pass;
    io.out << (pass ? "PASS " : "FAIL ") << t->name << " checks=" << t->count << " worst=" << format_number(t->worst, 3)
           << " tol=" << format_number(t->tolerance, 3) << '\n';
  }
  return ok ? kExitOk : kExitDomain;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Streams io{out, err};
  CLI::App app{"Sum-product network inference, exact edge moments and online learners"};
  app.require_subcommand(1);

  std::string model, prior, data, instance_row, function = "mean", csv_path;

  auto* validate_cmd = app.add_subcommand("validate", "Check structure, scopes and weight normalization");
  validate_cmd->add_option("model", model, "Model file")->required();

  auto* count_cmd = app.add_subcommand("count-trees", "Print the exact number of induced trees");
  count_cmd->add_option("model", model, "Model file")->required();

  auto* infer_cmd = app.add_subcommand("infer", "Per-row log-likelihood");
  infer_cmd->add_option("model", model, "Model file")->required();
  infer_cmd->add_option("--data", data, "CSV data file")->required();

  auto* moments_cmd = app.add_subcommand("moments", "Posterior edge moments for one instance (TSV)");
  moments_cmd->add_option("model", model, "Model file")->required();
  moments_cmd->add_option("--prior", prior, "Prior file")->required();
  moments_cmd->add_option("--instance", instance_row, "Comma-separated instance, ? marginalizes")->required();
  moments_cmd->add_option("--function", function, "mean | second | log")
      ->check(CLI::IsMember({"mean", "second", "log"}));

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Online learning over a data stream");
  train_cmd->add_option("model", train_args.model, "Model file")->required();
  train_cmd->add_option("--prior", train_args.prior, "Prior file (adf, bmm; default all-ones)");
  train_cmd->add_option("--data", train_args.data, "CSV data file")->required();
  train_cmd->add_option("--algo", train_args.algo, "adf | bmm | cccp")
      ->required()
      ->check(CLI::IsMember({"adf", "bmm", "cccp"}));
  train_cmd->add_option("--out-model", train_args.out_model, "Model with learned (mean) weights");
  train_cmd->add_option("--out-prior", train_args.out_prior, "Final Dirichlet hyperparameters (adf, bmm)");
  train_cmd->add_option("--log", train_args.log, "Training log CSV");
  train_cmd->add_flag("--abort-on-zero", train_args.abort_on_zero, "Fail on zero-evidence rows instead of skipping");
  train_cmd->add_option("--cccp-pseudocount", train_args.cccp_pseudocount,
                        "Initial responsibility counts per unit weight for cccp (default 0)");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the all-edges moment query across network sizes");
  bench_cmd->add_option("--min-edges", bench.min_edges, "Smallest network")->required();
  bench_cmd->add_option("--max-edges", bench.max_edges, "Largest network")->required();
  bench_cmd->add_option("--steps", bench.steps, "Number of sizes (geometric)")->required();
  bench_cmd->add_option("--seed", bench.seed, "Generator seed")->required();
  bench_cmd->add_flag("--naive", bench.naive, "Also time the quadratic per-edge route");
  bench_cmd->add_option("--naive-max-edges", bench.naive_max_edges, "Skip the naive route above this size");
  bench_cmd->add_option("--repetitions", bench.repetitions, "Timed repetitions per size (median reported)");
  bench_cmd->add_option("--csv", csv_path, "Also write the CSV here");

  std::size_t cap = oracle::kDefaultTreeCap;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Cross-check circuit results against tree enumeration");
  oracle_cmd->add_option("model", model, "Model file")->required();
  oracle_cmd->add_option("--prior", prior, "Prior file (default all-ones)");
  oracle_cmd->add_option("--data", data, "CSV data file")->required();
  oracle_cmd->add_option("--cap", cap, "Refuse networks with more induced trees than this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitIo;
  }

  try {
    if (*validate_cmd) return cmd_validate(model, io);
    if (*count_cmd) return cmd_count_trees(model, io);
    if (*infer_cmd) return cmd_infer(model, data, io);
    if (*moments_cmd) return cmd_moments(model, prior, instance_row, function, io);
    if (*train_cmd) return cmd_train(train_args, io);
    if (*bench_cmd) return cmd_bench(bench, csv_path, io);
    if (*oracle_cmd) return cmd_oracle_check(model, prior, data, cap, io);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitIo;
}

}  // namespace spn::cli
