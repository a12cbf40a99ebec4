#include "sdncmv/ensemble.hpp"

#include "sdncmv/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdncmv {
namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t index) {
  return Rng::stream(master, domain, index).next_u64();
}

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Eigen::VectorXi select_labels(const Eigen::VectorXi& z, const std::vector<std::size_t>& rows) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out(static_cast<Eigen::Index>(r)) = z(static_cast<Eigen::Index>(rows[r]));
  return out;
}

}  // namespace

void FeatureDataset::validate() const {
  const auto count = labels.size();
  if (count == 0) throw std::domain_error("feature dataset is empty");
  if (static_cast<Eigen::Index>(ids.size()) != count || confounders.rows() != count ||
      features.rows() != count)
    throw std::domain_error("feature dataset fields disagree on the subject count");
  if (p < 2 || features.cols() != static_cast<Eigen::Index>(edge_count(p)))
    throw std::domain_error("feature column count does not match p(p-1)/2");
  if (!features.allFinite() || !confounders.allFinite())
    throw std::domain_error("feature dataset contains non-finite values");
  for (Eigen::Index k = 0; k < count; ++k)
    if (labels(k) != 0 && labels(k) != 1) throw std::domain_error("labels must be 0 or 1");
}

void EnsembleSettings::validate() const {
  if (bootstrap_count < 1) throw std::domain_error("bootstrap count must be >= 1");
  if (keep_fraction <= 0.0 || keep_fraction > 1.0)
    throw std::domain_error("keep fraction must lie in (0,1]");
  plr.validate();
}

std::vector<std::size_t> screen_features(const Matrix& features, const Eigen::VectorXi& labels,
                                         double keep_fraction) {
  if (keep_fraction <= 0.0 || keep_fraction > 1.0)
    throw std::domain_error("keep fraction must lie in (0,1]");
  const auto n = labels.size();
  if (n < 4) throw std::domain_error("screening needs at least 4 subjects");
  if (features.rows() != n) throw std::domain_error("feature rows do not match labels");

  std::vector<Eigen::Index> g1, g0;
  for (Eigen::Index k = 0; k < n; ++k) (labels(k) == 1 ? g1 : g0).push_back(k);
  if (g1.empty() || g0.empty()) throw std::domain_error("screening needs both classes");
  const auto n1 = static_cast<double>(g1.size());
  const auto n0 = static_cast<double>(g0.size());

  const auto d = static_cast<std::size_t>(features.cols());
  std::vector<double> score(d, -1.0);  // zero pooled variance ranks below any |t|
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = features.col(static_cast<Eigen::Index>(j));
    double m1 = 0.0, m0 = 0.0;
    for (auto k : g1) m1 += col(k);
    for (auto k : g0) m0 += col(k);
    m1 /= n1;
    m0 /= n0;
    double ss = 0.0;
    for (auto k : g1) ss += (col(k) - m1) * (col(k) - m1);
    for (auto k : g0) ss += (col(k) - m0) * (col(k) - m0);
    const double pooled = std::sqrt(ss / (n1 + n0 - 2.0));
    if (pooled > 0.0) score[j] = std::abs(m1 - m0) / pooled;
  }

  auto keep = static_cast<std::size_t>(keep_fraction * static_cast<double>(d) + 1e-9);
  keep = std::clamp<std::size_t>(keep, 1, d);

  std::vector<std::size_t> order(d);
  for (std::size_t j = 0; j < d; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> stratified_bootstrap(const Eigen::VectorXi& labels, Rng& rng) {
  std::vector<std::size_t> g1, g0;
  for (Eigen::Index k = 0; k < labels.size(); ++k)
    (labels(k) == 1 ? g1 : g0).push_back(static_cast<std::size_t>(k));
  if (g1.empty() || g0.empty())
    throw std::domain_error("stratified bootstrap needs both classes");
  std::vector<std::size_t> draw;
  draw.reserve(g1.size() + g0.size());
  for (std::size_t k = 0; k < g1.size(); ++k) draw.push_back(g1[rng.uniform_int(g1.size())]);
  for (std::size_t k = 0; k < g0.size(); ++k) draw.push_back(g0[rng.uniform_int(g0.size())]);
  return draw;
}

EnsembleModel fit_ensemble(const FeatureDataset& train, const FeatureDataset& test,
                           const EnsembleSettings& settings, int jobs) {
  settings.validate();
  train.validate();
  const bool have_test = test.n() > 0;
  if (have_test) {
    test.validate();
    if (test.p != train.p || test.confounders.cols() != train.confounders.cols())
      throw std::domain_error("test features do not match training dimensions");
  }

  EnsembleModel ensemble;
  ensemble.bootstrap_count = settings.bootstrap_count;
  ensemble.seed = settings.seed;
  ensemble.p = train.p;
  ensemble.test_ids = test.ids;
  ensemble.test_labels = test.labels;
  ensemble.theta_counts.assign(ensemble.edge_universe(), 0);
  ensemble.models.resize(static_cast<std::size_t>(settings.bootstrap_count));
  ensemble.replicate_predictions.assign(static_cast<std::size_t>(settings.bootstrap_count), {});

  const std::vector<std::size_t> full_active =
      settings.screen_per_replicate
          ? std::vector<std::size_t>{}
          : screen_features(train.features, train.labels, settings.keep_fraction);
  ensemble.active_set = full_active;

  // fast mode: one shared (lambda, alpha) tuned on the full training set
  double shared_lambda = 0.0, shared_alpha = 1.0;
  if (!settings.tune_per_replicate) {
    const std::vector<std::size_t>& act =
        settings.screen_per_replicate
            ? screen_features(train.features, train.labels, settings.keep_fraction)
            : full_active;
    const CvTuneResult tuned =
        cv_tune(train.confounders, select_columns(train.features, act), train.labels,
                settings.plr, derive_seed(settings.seed, rng_domain::cv_folds, 0));
    shared_lambda = tuned.lambda;
    shared_alpha = tuned.alpha;
  }

  parallel_for(static_cast<std::size_t>(settings.bootstrap_count), jobs, [&](std::size_t b) {
    try {
      Rng rng = Rng::stream(settings.seed, rng_domain::bootstrap, b);
      const std::vector<std::size_t> rows = stratified_bootstrap(train.labels, rng);
      const Eigen::VectorXi z_b = select_labels(train.labels, rows);
      const Matrix q_b = select_rows(train.confounders, rows);

      std::vector<std::size_t> active = full_active;
      if (settings.screen_per_replicate)
        active = screen_features(select_rows(train.features, rows), z_b, settings.keep_fraction);
      const Matrix w_b = select_columns(select_rows(train.features, rows), active);

      PlrModel model;
      if (settings.tune_per_replicate) {
        model = cv_tune(q_b, w_b, z_b, settings.plr,
                        derive_seed(settings.seed, rng_domain::cv_folds, b + 1))
                    .model;
      } else {
        model = fit_plr(q_b, w_b, z_b, shared_lambda, shared_alpha, settings.plr);
      }
      model.feature_index = active;

      if (have_test) {
        const Vector prob =
            predict_proba(model, test.confounders, select_columns(test.features, active));
        std::vector<int> pred(static_cast<std::size_t>(prob.size()));
        for (Eigen::Index k = 0; k < prob.size(); ++k)
          pred[static_cast<std::size_t>(k)] = prob(k) > 0.5 ? 1 : 0;
        ensemble.replicate_predictions[b] = std::move(pred);
      }
      ensemble.models[b] = std::move(model);
    } catch (const std::exception& e) {
      throw std::runtime_error("bootstrap replicate " + std::to_string(b + 1) + ": " + e.what());
    }
  });

  for (const auto& model : ensemble.models)
    for (std::size_t j : model.support())
      ++ensemble.theta_counts[model.feature_index[j]];

  ensemble.votes.assign(static_cast<std::size_t>(test.n()), 0);
  for (const auto& pred : ensemble.replicate_predictions)
    for (std::size_t k = 0; k < pred.size(); ++k) ensemble.votes[k] += pred[k];

  return ensemble;
}

int vote_classify(const EnsembleModel& ensemble, std::size_t test_subject) {
  if (test_subject >= ensemble.votes.size())
    throw std::domain_error("unknown test subject index");
  return 2 * ensemble.votes[test_subject] > ensemble.bootstrap_count ? 1 : 0;
}

DifferentialNetwork differential_network(const EnsembleModel& ensemble, int tau) {
  if (tau < 0 || tau > ensemble.bootstrap_count)
    throw std::domain_error("tau must lie in [0, B]");
  DifferentialNetwork net;
  net.tau = tau;
  for (std::size_t k = 0; k < ensemble.theta_counts.size(); ++k) {
    if (ensemble.theta_counts[k] > tau) {
      const auto [i, j] = edge_from_index(k, ensemble.p);
      net.edges.push_back({i, j, ensemble.theta_counts[k]});
    }
  }
  std::sort(net.edges.begin(), net.edges.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return net;
}

std::vector<std::pair<int, std::size_t>> scree_data(const EnsembleModel& ensemble) {
  std::vector<std::pair<int, std::size_t>> out;
  out.reserve(static_cast<std::size_t>(ensemble.bootstrap_count) + 1);
  for (int tau = 0; tau <= ensemble.bootstrap_count; ++tau) {
    std::size_t count = 0;
    for (int theta : ensemble.theta_counts) count += (theta > tau);
    out.emplace_back(tau, count);
  }
  return out;
}

}  // namespace sdncmv
