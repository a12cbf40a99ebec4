// sdncmv command-line interface: simulate | features | fit | evaluate | replicate
#include "sdncmv/ensemble.hpp"
#include "sdncmv/evalmetrics.hpp"
#include "sdncmv/io.hpp"
#include "sdncmv/parallel.hpp"
#include "sdncmv/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace sdncmv;
namespace fs = std::filesystem;

struct CommonFlags {
  int jobs = default_jobs();
  std::string out;
};

void add_jobs_flag(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--jobs", flags.jobs, "worker threads (default: SDNCMV_JOBS or 1)");
}

struct ScenarioFlags {
  ScenarioConfig config;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scenario", config.scenario, "scenario id 1..4")->required();
    cmd->add_option("--p", config.p, "region count");
    cmd->add_option("--q", config.q, "time points");
    cmd->add_option("--n1", config.n1, "case training subjects");
    cmd->add_option("--n2", config.n2, "control training subjects");
    cmd->add_option("--n1-test", config.n1_test, "case test subjects (default: n1)");
    cmd->add_option("--n2-test", config.n2_test, "control test subjects (default: n2)");
    cmd->add_option("--seed", config.seed, "master seed");
    cmd->add_option("--hub-blocks", config.hub_blocks, "hub graph block count");
    cmd->add_option("--subgraphs", config.small_world_subgraphs, "small-world subgraph count");
    cmd->add_option("--rewire-prob", config.rewire_prob, "small-world rewiring probability");
    cmd->add_option("--perturb-var", config.perturb_var, "individual perturbation variance");
  }
};

struct FitFlags {
  RunConfig run;
  std::vector<double> alpha_grid;

  void add_to(CLI::App* cmd, bool with_clime, bool with_seed = true) {
    cmd->add_option("--B", run.bootstrap_count, "bootstrap replicates");
    cmd->add_option("--tau", run.tau, "differential edge threshold (default: B/2)");
    cmd->add_option("--keep-fraction", run.keep_fraction, "screened fraction of edges");
    if (with_seed) cmd->add_option("--seed", run.seed, "master seed");
    cmd->add_option("--alpha", alpha_grid, "elastic-net alpha grid values");
    cmd->add_option("--path-length", run.plr.lambda_path_length, "lambda path length");
    cmd->add_option("--folds", run.plr.cv_folds, "cross-validation folds");
    cmd->add_option("--max-iterations", run.plr.max_iterations, "solver iteration cap");
    cmd->add_flag_callback("--fast-tune", [this] { run.tune_per_replicate = false; },
                           "tune (lambda, alpha) once instead of per replicate");
    cmd->add_flag_callback("--screen-per-replicate",
                           [this] { run.screen_per_replicate = true; },
                           "re-screen edges inside every bootstrap replicate");
    cmd->add_flag_callback("--no-intercept", [this] { run.plr.fit_intercept = false; },
                           "drop the unpenalized intercept");
    if (with_clime) {
      cmd->add_option("--density", run.clime.target_density, "CLIME target density");
      cmd->add_option("--max-bisect", run.clime.max_bisection_steps, "density bisection budget");
      cmd->add_option("--lp-tolerance", run.clime.lp_tolerance, "CLIME LP feasibility slack");
    }
  }

  void finalize() {
    if (!alpha_grid.empty()) run.plr.alpha_grid = alpha_grid;
  }
};

int cmd_simulate(const ScenarioFlags& scenario, const CommonFlags& common) {
  const ScenarioData data = gen_scenario(scenario.config, common.jobs);
  const fs::path dir(common.out);
  io::write_dataset(dir, data.train, scenario.config);
  io::write_dataset(dir, data.test, scenario.config, "test");
  io::write_truth_tsv(dir / "truth.tsv", data.truth, scenario.config.p);
  std::cout << "wrote " << data.train.subjects.size() << " training and "
            << data.test.subjects.size() << " test subjects to " << dir.string() << "\n";
  return 0;
}

int cmd_features(const std::string& data_dir, const std::string& manifest,
                 const ClimeSettings& clime, const std::string& log_path,
                 const CommonFlags& common) {
  const io::LoadedDataset loaded = io::read_dataset(data_dir, manifest);
  const CohortFeaturesResult result = compute_cohort_features(loaded.cohort, clime, common.jobs);
  io::write_features_tsv(common.out, result.features);
  fs::path log = log_path;
  if (log.empty()) {
    log = common.out;
    log.replace_extension();
    log += "_clime_log.tsv";
  }
  io::write_clime_log_tsv(log, result.log);
  if (result.failures > 0) {
    std::cerr << result.failures << " subject(s) failed feature extraction\n";
    return 1;
  }
  std::cout << "wrote features for " << result.features.ids.size() << " subjects to "
            << common.out << "\n";
  return 0;
}

int cmd_fit(const std::string& train_path, const std::string& test_path, FitFlags& flags,
            const CommonFlags& common) {
  flags.finalize();
  const FeatureDataset train = io::read_features_tsv(train_path);
  FeatureDataset test;
  if (!test_path.empty()) test = io::read_features_tsv(test_path);

  EnsembleSettings settings = flags.run.ensemble_settings();
  const EnsembleModel model = fit_ensemble(train, test, settings, common.jobs);

  const fs::path dir(common.out);
  fs::create_directories(dir);
  io::write_model_json(dir / "model.json", model);
  io::write_edges_tsv(dir / "edges.tsv", differential_network(model, flags.run.effective_tau()));
  io::write_scree_tsv(dir / "scree.tsv", scree_data(model));

  if (test.n() > 0) {
    io::write_predictions_tsv(dir / "predictions.tsv", model);
    std::vector<int> predicted, actual;
    for (std::size_t k = 0; k < model.votes.size(); ++k) {
      predicted.push_back(vote_classify(model, k));
      actual.push_back(model.test_labels(static_cast<Eigen::Index>(k)));
    }
    io::write_metrics_tsv(dir / "metrics.tsv",
                          {{"misclassification", misclassification_rate(predicted, actual)}});
  }
  std::cout << "fit " << model.bootstrap_count << " replicates; artifacts in " << dir.string()
            << "\n";
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& truth_path, int tau,
                 const CommonFlags& common) {
  const EnsembleModel model = io::read_model_json(model_path);
  const std::vector<std::size_t> truth = io::read_truth_support(truth_path, model.p);
  const int effective_tau = tau < 0 ? model.bootstrap_count / 2 : tau;

  const DifferentialNetwork net = differential_network(model, effective_tau);
  std::vector<std::size_t> estimated;
  for (const auto& e : net.edges) estimated.push_back(edge_index(e.i, e.j, model.p));
  std::sort(estimated.begin(), estimated.end());

  const SupportMetrics m = support_metrics({truth, estimated, model.edge_universe()});
  const fs::path dir(common.out);
  fs::create_directories(dir);
  io::write_metrics_tsv(dir / "metrics.tsv", {{"tau", static_cast<double>(effective_tau)},
                                              {"edges", static_cast<double>(net.edges.size())},
                                              {"tpr", m.tpr},
                                              {"tnr", m.tnr},
                                              {"tdr", m.tdr}});
  io::write_pr_tsv(dir / "pr.tsv", pr_curve(model.theta_counts, truth, model.bootstrap_count));
  std::printf("tau=%d edges=%zu TPR=%.3f TNR=%.3f TDR=%.3f\n", effective_tau, net.edges.size(),
              m.tpr, m.tnr, m.tdr);
  return 0;
}

int cmd_replicate(const std::string& table, ScenarioFlags& scenario, FitFlags& flags,
                  int replications, const CommonFlags& common) {
  flags.finalize();
  flags.run.seed = scenario.config.seed;  // one master seed drives everything

  const fs::path dir(common.out);
  fs::create_directories(dir);

  const char* header =
      "replication\tseed\tmisclassification\ttpr\ttnr\ttdr\ttdr_single\tauc\tauc_single\tedges\n";
  auto row_of = [](std::size_t r, const ReplicationResult& x) {
    return std::to_string(r) + '\t' + std::to_string(x.seed) + '\t' +
           io::format_double(x.misclassification) + '\t' + io::format_double(x.tpr) + '\t' +
           io::format_double(x.tnr) + '\t' + io::format_double(x.tdr) + '\t' +
           io::format_double(x.tdr_single) + '\t' + io::format_double(x.auc_ensemble) + '\t' +
           io::format_double(x.auc_single) + '\t' + std::to_string(x.edges_estimated) + '\n';
  };

  // each replication lands on disk as soon as it finishes, so an aborted
  // run keeps what was already computed
  const auto persist_partial = [&](std::size_t r, const ReplicationResult& x) {
    char name[32];
    std::snprintf(name, sizeof(name), "rep_%03zu.tsv", r);
    io::write_text_atomic(dir / "partials" / name, std::string(header) + row_of(r, x));
  };
  const std::vector<ReplicationResult> results =
      run_replications(scenario.config, flags.run, replications, common.jobs, persist_partial);

  std::string rows = header;
  for (std::size_t r = 0; r < results.size(); ++r) rows += row_of(r, results[r]);
  io::write_text_atomic(dir / "replications.tsv", rows);

  if (table == "prcurve") {
    for (std::size_t r = 0; r < results.size(); ++r) {
      char name[32];
      std::snprintf(name, sizeof(name), "pr_rep_%03zu.tsv", r);
      io::write_pr_tsv(dir / name, results[r].pr_points);
    }
  }

  auto column = [&](auto getter) {
    std::vector<double> v;
    for (const auto& x : results) v.push_back(getter(x));
    return v;
  };
  std::vector<std::pair<std::string, std::vector<double>>> metrics;
  if (table == "table1") {
    metrics = {{"misclassification", column([](const auto& x) { return x.misclassification; })}};
  } else if (table == "table2") {
    metrics = {{"tpr", column([](const auto& x) { return x.tpr; })},
               {"tnr", column([](const auto& x) { return x.tnr; })},
               {"tdr", column([](const auto& x) { return x.tdr; })},
               {"tdr_single", column([](const auto& x) { return x.tdr_single; })}};
  } else {
    metrics = {{"auc", column([](const auto& x) { return x.auc_ensemble; })},
               {"auc_single", column([](const auto& x) { return x.auc_single; })}};
  }
  std::string summary = "metric\tmean\tse\n";
  for (const auto& [name, values] : metrics) {
    const MetricSummary s = summarize(values);
    summary += name + '\t' + io::format_double(s.mean) + '\t' + io::format_double(s.se) + '\n';
  }
  io::write_text_atomic(dir / "summary.tsv", summary);
  std::cout << summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDNCMV: simultaneous differential network analysis and classification "
               "for matrix-variate data"};
  app.require_subcommand(1);

  CommonFlags common;
  ScenarioFlags scenario;
  FitFlags fit_flags;
  std::string data_dir, manifest = "manifest.json", log_path;
  std::string train_path, test_path, model_path, truth_path;
  std::string table = "table1";
  int replications = 20;
  int eval_tau = -1;

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario cohort");
  scenario.add_to(simulate);
  simulate->add_option("--out", common.out, "output directory")->required();
  add_jobs_flag(simulate, common);

  auto* features = app.add_subcommand("features", "first-stage network-strength features");
  features->add_option("--data", data_dir, "dataset directory")->required();
  features->add_option("--manifest", manifest, "manifest file name inside --data");
  features->add_option("--out", common.out, "output features TSV")->required();
  features->add_option("--log", log_path,
                       "per-subject CLIME log TSV (default: <out>_clime_log.tsv)");
  features->add_option("--density", fit_flags.run.clime.target_density, "CLIME target density");
  features->add_option("--max-bisect", fit_flags.run.clime.max_bisection_steps,
                       "density bisection budget");
  features->add_option("--lp-tolerance", fit_flags.run.clime.lp_tolerance,
                       "CLIME LP feasibility slack");
  add_jobs_flag(features, common);

  auto* fit = app.add_subcommand("fit", "bootstrap ensemble of penalized logistic fits");
  fit->add_option("--train", train_path, "training features TSV")->required();
  fit->add_option("--test", test_path, "test features TSV");
  fit->add_option("--out", common.out, "output directory")->required();
  fit_flags.add_to(fit, false);
  add_jobs_flag(fit, common);

  auto* evaluate = app.add_subcommand("evaluate", "score a model against ground truth");
  evaluate->add_option("--model", model_path, "model.json from fit")->required();
  evaluate->add_option("--truth", truth_path, "truth.tsv from simulate")->required();
  evaluate->add_option("--tau", eval_tau, "threshold (default: B/2)");
  evaluate->add_option("--out", common.out, "output directory")->required();

  auto* replicate = app.add_subcommand("replicate", "replicated end-to-end experiment");
  replicate->add_option("--table", table, "table1 | table2 | prcurve")
      ->check(CLI::IsMember({"table1", "table2", "prcurve"}));
  scenario.add_to(replicate);
  replicate->add_option("--replications", replications, "independent replications");
  fit_flags.add_to(replicate, true, false);  // the scenario --seed is the master seed
  replicate->add_option("--out", common.out, "output directory")->required();
  add_jobs_flag(replicate, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(scenario, common);
    if (features->parsed())
      return cmd_features(data_dir, manifest, fit_flags.run.clime, log_path, common);
    if (fit->parsed()) return cmd_fit(train_path, test_path, fit_flags, common);
    if (evaluate->parsed()) return cmd_evaluate(model_path, truth_path, eval_tau, common);
    if (replicate->parsed())
      return cmd_replicate(table, scenario, fit_flags, replications, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
