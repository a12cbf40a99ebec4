#include "sdncmv/evalmetrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdncmv {
namespace {

std::size_t intersection_size(const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

double misclassification_rate(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.size() != actual.size() || predicted.empty())
    throw std::domain_error("misclassification_rate: need equal nonempty label vectors");
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) wrong += (predicted[k] != actual[k]);
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

SupportMetrics support_metrics(const SupportComparison& cmp) {
  for (auto k : cmp.true_support)
    if (k >= cmp.universe_size) throw std::domain_error("true support outside the edge universe");
  for (auto k : cmp.estimated_support)
    if (k >= cmp.universe_size)
      throw std::domain_error("estimated support outside the edge universe");

  const std::size_t tp = intersection_size(cmp.true_support, cmp.estimated_support);
  const std::size_t t = cmp.true_support.size();
  const std::size_t e = cmp.estimated_support.size();
  const std::size_t negatives = cmp.universe_size - t;
  const std::size_t false_pos = e - tp;

  SupportMetrics m;
  m.tpr = t == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(t);
  m.tnr = negatives == 0 ? 1.0
                         : static_cast<double>(negatives - false_pos) /
                               static_cast<double>(negatives);
  if (e == 0)
    m.tdr = t == 0 ? 1.0 : 0.0;
  else
    m.tdr = static_cast<double>(tp) / static_cast<double>(e);
  return m;
}

std::vector<PrPoint> pr_curve(const std::vector<int>& theta_counts,
                              const std::vector<std::size_t>& true_support, int bootstrap_count) {
  std::vector<PrPoint> out;
  const std::size_t universe = theta_counts.size();
  for (int tau = bootstrap_count; tau >= 0; --tau) {
    std::vector<std::size_t> estimated;
    for (std::size_t k = 0; k < universe; ++k)
      if (theta_counts[k] > tau) estimated.push_back(k);
    if (estimated.empty()) continue;
    const SupportMetrics m = support_metrics({true_support, estimated, universe});
    out.push_back({tau, m.tpr, m.tdr});
  }
  return out;
}

double pr_auc(const std::vector<PrPoint>& curve) {
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& pt : curve) {
    area += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return area;
}

}  // namespace sdncmv
