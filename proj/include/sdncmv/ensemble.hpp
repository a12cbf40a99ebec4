#pragma once

#include "sdncmv/core.hpp"
#include "sdncmv/plr.hpp"
#include "sdncmv/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdncmv {

/// Second-stage design: one row per subject, edge features in
/// EdgeIndexMap order plus optional confounders.
struct FeatureDataset {
  std::vector<std::string> ids;
  Eigen::VectorXi labels;
  Matrix confounders;  // n x M (M may be 0)
  Matrix features;     // n x p(p-1)/2
  int p = 0;

  Eigen::Index n() const { return labels.size(); }
  void validate() const;
};

struct EnsembleSettings {
  int bootstrap_count = 200;  // B
  double keep_fraction = 0.15;
  bool screen_per_replicate = false;  // default screens once on the full training set
  bool tune_per_replicate = true;     // false reuses one (lambda, alpha) from the full data
  PlrFitSettings plr;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EnsembleModel {
  int bootstrap_count = 0;
  std::uint64_t seed = 0;
  int p = 0;
  std::vector<std::size_t> active_set;  // screened edge indices, ascending
  std::vector<PlrModel> models;         // one per replicate
  std::vector<int> theta_counts;        // per edge over the full universe
  std::vector<std::vector<int>> replicate_predictions;  // B x n_test, entries 0/1
  std::vector<int> votes;                               // per test subject
  std::vector<std::string> test_ids;
  Eigen::VectorXi test_labels;

  std::size_t edge_universe() const { return edge_count(p); }
};

struct DifferentialEdge {
  int i = 0;  // 1-based regions, i < j
  int j = 0;
  int count = 0;
};

struct DifferentialNetwork {
  std::vector<DifferentialEdge> edges;
  int tau = 0;
};

/// Marginal screening: edges ranked by |two-sample mean difference| over
/// the pooled standard deviation; the top floor(keep_fraction * d) edge
/// indices (at least one) are returned in ascending order. Zero pooled
/// variance ranks last.
std::vector<std::size_t> screen_features(const Matrix& features, const Eigen::VectorXi& labels,
                                         double keep_fraction);

/// n1 draws with replacement from the label-1 rows followed by n2 draws
/// from the label-0 rows.
std::vector<std::size_t> stratified_bootstrap(const Eigen::VectorXi& labels, Rng& rng);

/// Algorithm core: B stratified bootstrap replicates, each fit with its
/// own derived RNG stream, accumulating edge occurrence counts and test
/// votes. Results do not depend on execution order.
EnsembleModel fit_ensemble(const FeatureDataset& train, const FeatureDataset& test,
                           const EnsembleSettings& settings, int jobs = 1);

/// Majority vote: label 1 iff votes/B exceeds 1/2 strictly.
int vote_classify(const EnsembleModel& ensemble, std::size_t test_subject);

/// Edges whose occurrence count exceeds tau, ordered by count descending
/// then (i, j) ascending.
DifferentialNetwork differential_network(const EnsembleModel& ensemble, int tau);

/// (tau, number of edges with count > tau) for tau = 0..B.
std::vector<std::pair<int, std::size_t>> scree_data(const EnsembleModel& ensemble);

}  // namespace sdncmv
