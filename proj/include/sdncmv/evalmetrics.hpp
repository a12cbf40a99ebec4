#pragma once

#include <cstddef>
#include <vector>

namespace sdncmv {

/// True vs estimated differential supports over the p(p-1)/2 edge
/// universe, both as ascending flat edge indices.
struct SupportComparison {
  std::vector<std::size_t> true_support;
  std::vector<std::size_t> estimated_support;
  std::size_t universe_size = 0;
};

struct SupportMetrics {
  double tpr = 0.0;
  double tnr = 0.0;
  double tdr = 0.0;
};

double misclassification_rate(const std::vector<int>& predicted, const std::vector<int>& actual);

/// TPR, TNR and TDR of the estimated support. Degenerate denominators
/// resolve to: TPR/TNR 1 when vacuous, TDR 1 only when both supports are
/// empty and 0 when the truth is nonempty but nothing was estimated.
SupportMetrics support_metrics(const SupportComparison& cmp);

struct PrPoint {
  int tau = 0;
  double recall = 0.0;
  double precision = 0.0;
};

/// Precision-recall sweep over tau = B..0 with estimated support
/// {edges with count > tau}; taus with empty support are skipped, so the
/// points run in increasing recall order.
std::vector<PrPoint> pr_curve(const std::vector<int>& theta_counts,
                              const std::vector<std::size_t>& true_support, int bootstrap_count);

/// Area under the PR sweep: sum of precision * recall-increment with the
/// sweep entered at recall zero.
double pr_auc(const std::vector<PrPoint>& curve);

}  // namespace sdncmv
