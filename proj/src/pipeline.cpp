#include "sdncmv/pipeline.hpp"

#include "sdncmv/parallel.hpp"

#include <cmath>

namespace sdncmv {
namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t index) {
  return Rng::stream(master, domain, index).next_u64();
}

std::vector<std::size_t> sorted_support(const PlrModel& model) {
  std::vector<std::size_t> support;
  for (std::size_t pos : model.support()) support.push_back(model.feature_index[pos]);
  std::sort(support.begin(), support.end());
  return support;
}

}  // namespace

EnsembleSettings RunConfig::ensemble_settings() const {
  EnsembleSettings s;
  s.bootstrap_count = bootstrap_count;
  s.keep_fraction = keep_fraction;
  s.screen_per_replicate = screen_per_replicate;
  s.tune_per_replicate = tune_per_replicate;
  s.plr = plr;
  s.seed = seed;
  return s;
}

CohortFeaturesResult compute_cohort_features(const CohortDataset& cohort,
                                             const ClimeSettings& settings, int jobs) {
  cohort.validate();
  const auto n = cohort.subjects.size();
  const auto edge_cols = static_cast<Eigen::Index>(edge_count(static_cast<int>(cohort.p())));

  std::vector<io::ClimeLogRow> log(n);
  std::vector<Vector> rows(n);
  std::vector<char> ok(n, 0);

  parallel_for(n, jobs, [&](std::size_t k) {
    const auto& subject = cohort.subjects[k];
    io::ClimeLogRow& entry = log[k];
    entry.id = subject.id;
    try {
      const SubjectFeatures sf = subject_features(subject, settings);
      rows[k] = sf.features.values;
      entry.lambda = sf.estimate.lambda;
      entry.density = sf.estimate.density;
      entry.attainable = sf.density_attainable;
      ok[k] = 1;
    } catch (const std::exception& e) {
      entry.status = std::string("failed: ") + e.what();
    }
  });

  CohortFeaturesResult result;
  result.log = std::move(log);
  FeatureDataset& out = result.features;
  out.p = static_cast<int>(cohort.p());

  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < n; ++k) {
    if (ok[k])
      kept.push_back(k);
    else
      ++result.failures;
  }
  out.labels.resize(static_cast<Eigen::Index>(kept.size()));
  out.features.resize(static_cast<Eigen::Index>(kept.size()), edge_cols);
  out.confounders.resize(static_cast<Eigen::Index>(kept.size()), cohort.n_confounders());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const std::size_t k = kept[r];
    out.ids.push_back(cohort.subjects[k].id);
    out.labels(static_cast<Eigen::Index>(r)) = cohort.subjects[k].label;
    out.features.row(static_cast<Eigen::Index>(r)) = rows[k].transpose();
    if (cohort.n_confounders() > 0)
      out.confounders.row(static_cast<Eigen::Index>(r)) = cohort.confounders[k].transpose();
  }
  return result;
}

ReplicationResult run_replication(const ScenarioConfig& scenario, const RunConfig& config,
                                  int jobs) {
  ReplicationResult res;
  res.seed = scenario.seed;

  const ScenarioData data = gen_scenario(scenario, jobs);

  const CohortFeaturesResult train_feat = compute_cohort_features(data.train, config.clime, jobs);
  const CohortFeaturesResult test_feat = compute_cohort_features(data.test, config.clime, jobs);
  if (train_feat.failures > 0 || test_feat.failures > 0)
    throw std::runtime_error("feature extraction failed for " +
                             std::to_string(train_feat.failures + test_feat.failures) +
                             " subjects");

  EnsembleSettings es = config.ensemble_settings();
  es.seed = scenario.seed;
  const EnsembleModel ensemble = fit_ensemble(train_feat.features, test_feat.features, es, jobs);

  std::vector<int> predicted, actual;
  for (std::size_t k = 0; k < ensemble.votes.size(); ++k) {
    predicted.push_back(vote_classify(ensemble, k));
    actual.push_back(ensemble.test_labels(static_cast<Eigen::Index>(k)));
  }
  res.misclassification = misclassification_rate(predicted, actual);

  const DifferentialNetwork net = differential_network(ensemble, config.effective_tau());
  std::vector<std::size_t> estimated;
  for (const auto& e : net.edges) estimated.push_back(edge_index(e.i, e.j, ensemble.p));
  std::sort(estimated.begin(), estimated.end());
  res.edges_estimated = estimated.size();

  const std::size_t universe = ensemble.edge_universe();
  const SupportMetrics m =
      support_metrics({data.truth.delta_support, estimated, universe});
  res.tpr = m.tpr;
  res.tnr = m.tnr;
  res.tdr = m.tdr;
  res.pr_points =
      pr_curve(ensemble.theta_counts, data.truth.delta_support, ensemble.bootstrap_count);
  res.auc_ensemble = pr_auc(res.pr_points);

  // single un-bootstrapped fit on the same screened features
  const std::vector<std::size_t> active =
      screen_features(train_feat.features.features, train_feat.features.labels,
                      config.keep_fraction);
  Matrix w_active(train_feat.features.n(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c)
    w_active.col(static_cast<Eigen::Index>(c)) =
        train_feat.features.features.col(static_cast<Eigen::Index>(active[c]));
  CvTuneResult single = cv_tune(train_feat.features.confounders, w_active,
                                train_feat.features.labels, config.plr,
                                derive_seed(scenario.seed, rng_domain::cv_folds, 0));
  single.model.feature_index = active;
  const std::vector<std::size_t> single_support = sorted_support(single.model);
  const SupportMetrics sm =
      support_metrics({data.truth.delta_support, single_support, universe});
  res.tdr_single = sm.tdr;
  std::vector<int> single_counts(universe, 0);
  for (std::size_t k : single_support) single_counts[k] = 1;
  res.auc_single = pr_auc(pr_curve(single_counts, data.truth.delta_support, 1));
  return res;
}

std::vector<ReplicationResult> run_replications(const ScenarioConfig& base_scenario,
                                                const RunConfig& config, int replications,
                                                int jobs, const ReplicationCallback& on_result) {
  if (replications < 1) throw std::domain_error("need at least one replication");
  std::vector<ReplicationResult> results(static_cast<std::size_t>(replications));
  const int outer = std::min(jobs, replications);
  const int inner = outer > 1 ? 1 : jobs;
  parallel_for(static_cast<std::size_t>(replications), outer, [&](std::size_t r) {
    ScenarioConfig scenario = base_scenario;
    scenario.seed = derive_seed(config.seed, rng_domain::replication, r);
    RunConfig rep_config = config;
    rep_config.seed = scenario.seed;
    results[r] = run_replication(scenario, rep_config, inner);
    if (on_result) on_result(r, results[r]);
  });
  return results;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

}  // namespace sdncmv
