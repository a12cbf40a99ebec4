#include "sdncmv/core.hpp"

#include <cmath>

namespace sdncmv {

void SubjectMatrix::validate() const {
  if (data.rows() < 2) throw std::domain_error("subject " + id + ": p must be >= 2");
  if (data.cols() < 3) throw std::domain_error("subject " + id + ": q must be >= 3");
  if (!data.allFinite()) throw std::domain_error("subject " + id + ": non-finite entries");
  if (label != 0 && label != 1) throw std::domain_error("subject " + id + ": label must be 0 or 1");
}

std::size_t CohortDataset::n1() const {
  std::size_t c = 0;
  for (const auto& s : subjects) c += (s.label == 1);
  return c;
}

std::size_t CohortDataset::n2() const {
  std::size_t c = 0;
  for (const auto& s : subjects) c += (s.label == 0);
  return c;
}

void CohortDataset::validate() const {
  if (subjects.empty()) throw std::domain_error("dataset has no subjects");
  const Eigen::Index p0 = subjects.front().p();
  const Eigen::Index q0 = subjects.front().q();
  for (const auto& s : subjects) {
    s.validate();
    if (s.p() != p0 || s.q() != q0)
      throw std::domain_error("subject " + s.id + ": dimensions differ from cohort (p,q)");
  }
  if (!confounders.empty()) {
    if (confounders.size() != subjects.size())
      throw std::domain_error("confounder count does not match subject count");
    const Eigen::Index m0 = confounders.front().size();
    for (const auto& c : confounders) {
      if (c.size() != m0) throw std::domain_error("confounder vectors have unequal lengths");
      if (!c.allFinite()) throw std::domain_error("non-finite confounder value");
    }
  }
}

void CohortDataset::validate_for_training() const {
  validate();
  if (n1() < 1 || n2() < 1)
    throw std::domain_error("training requires at least one subject per group");
}

std::size_t edge_index(int i, int j, int p) {
  if (i < 1 || j <= i || j > p)
    throw std::domain_error("edge_index: require 1 <= i < j <= p");
  const auto jj = static_cast<std::size_t>(j);
  return (jj - 1) * (jj - 2) / 2 + static_cast<std::size_t>(i) - 1;
}

std::pair<int, int> edge_from_index(std::size_t k, int p) {
  if (p < 2 || k >= edge_count(p))
    throw std::domain_error("edge_from_index: index out of range");
  // t(t-1)/2 <= k < t(t+1)/2 with j = t + 1
  auto t = static_cast<std::size_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
  while (t * (t - 1) / 2 > k) --t;
  while (t * (t + 1) / 2 <= k) ++t;
  const std::size_t i = k - t * (t - 1) / 2 + 1;
  return {static_cast<int>(i), static_cast<int>(t + 1)};
}

EdgeIndexMap::EdgeIndexMap(int p_regions) : p(p_regions) {
  if (p < 2) throw std::domain_error("EdgeIndexMap: p must be >= 2");
}

std::vector<std::pair<int, int>> EdgeIndexMap::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(size());
  for (int j = 2; j <= p; ++j)
    for (int i = 1; i < j; ++i) out.emplace_back(i, j);
  return out;
}

}  // namespace sdncmv
