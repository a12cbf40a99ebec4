#pragma once

#include "sdncmv/ensemble.hpp"
#include "sdncmv/evalmetrics.hpp"
#include "sdncmv/io.hpp"
#include "sdncmv/netstrength.hpp"
#include "sdncmv/synthgen.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace sdncmv {

/// Everything one experiment needs beyond the data itself.
struct RunConfig {
  ClimeSettings clime;
  PlrFitSettings plr;
  int bootstrap_count = 200;
  double keep_fraction = 0.15;
  int tau = -1;  // -1 means B/2
  bool tune_per_replicate = true;
  bool screen_per_replicate = false;
  std::uint64_t seed = 0;

  int effective_tau() const { return tau < 0 ? bootstrap_count / 2 : tau; }
  EnsembleSettings ensemble_settings() const;
};

struct CohortFeaturesResult {
  FeatureDataset features;             // successfully processed subjects only
  std::vector<io::ClimeLogRow> log;    // one row per subject, failures flagged
  std::size_t failures = 0;
};

/// First-stage features for a whole cohort, parallel over subjects.
/// CLIME failures are recorded and skipped rather than aborting the run.
CohortFeaturesResult compute_cohort_features(const CohortDataset& cohort,
                                             const ClimeSettings& settings, int jobs);

struct ReplicationResult {
  std::uint64_t seed = 0;
  double misclassification = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double tdr = 0.0;
  double tdr_single = 0.0;   // un-bootstrapped single-fit baseline
  double auc_ensemble = 0.0;
  double auc_single = 0.0;
  std::size_t edges_estimated = 0;
  std::vector<PrPoint> pr_points;  // ensemble precision-recall sweep
};

/// One full pipeline pass: simulate, features, ensemble, evaluate, plus
/// the single-fit baseline on the same features.
ReplicationResult run_replication(const ScenarioConfig& scenario, const RunConfig& config,
                                  int jobs);

/// Independent replications with per-replication seeds derived from
/// config.seed. Output is identical for any jobs value. `on_result`,
/// when set, fires as each replication completes (possibly from worker
/// threads, never twice for one index) so callers can persist partial
/// results.
using ReplicationCallback = std::function<void(std::size_t, const ReplicationResult&)>;
std::vector<ReplicationResult> run_replications(const ScenarioConfig& base_scenario,
                                                const RunConfig& config, int replications,
                                                int jobs,
                                                const ReplicationCallback& on_result = {});

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

MetricSummary summarize(const std::vector<double>& values);

}  // namespace sdncmv
