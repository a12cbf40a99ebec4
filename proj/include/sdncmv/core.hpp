#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sdncmv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One subject's spatial-by-temporal observation. Rows are regions,
/// columns are time points. label: 1 = case, 0 = control.
struct SubjectMatrix {
  std::string id;
  int label = 0;
  Matrix data;

  Eigen::Index p() const { return data.rows(); }
  Eigen::Index q() const { return data.cols(); }

  // Throws std::domain_error on p < 2, q < 3, non-finite entries or bad label.
  void validate() const;
};

/// A cohort of subjects sharing (p, q), with optional per-subject
/// confounder vectors of common length M.
struct CohortDataset {
  std::vector<SubjectMatrix> subjects;
  std::vector<Vector> confounders;  // empty, or one vector per subject

  Eigen::Index p() const { return subjects.empty() ? 0 : subjects.front().p(); }
  Eigen::Index q() const { return subjects.empty() ? 0 : subjects.front().q(); }
  Eigen::Index n_confounders() const {
    return confounders.empty() ? 0 : confounders.front().size();
  }
  std::size_t n1() const;  // label-1 count
  std::size_t n2() const;  // label-0 count

  void validate() const;
  // validate() plus n1 >= 1 and n2 >= 1.
  void validate_for_training() const;
};

/// Flat position of edge (i, j), 1 <= i < j <= p, in the column-stacked
/// upper-triangle order: for p = 4 the order is
/// (1,2),(1,3),(2,3),(1,4),(2,4),(3,4). The returned index is 0-based.
std::size_t edge_index(int i, int j, int p);

/// Inverse of edge_index; returns the 1-based pair (i, j).
std::pair<int, int> edge_from_index(std::size_t k, int p);

inline std::size_t edge_count(int p) {
  return static_cast<std::size_t>(p) * (p - 1) / 2;
}

/// Canonical edge enumeration for a fixed region count.
struct EdgeIndexMap {
  int p = 0;

  explicit EdgeIndexMap(int p_regions);

  std::size_t size() const { return edge_count(p); }
  std::size_t flat(int i, int j) const { return edge_index(i, j, p); }
  std::pair<int, int> pair(std::size_t k) const { return edge_from_index(k, p); }
  std::vector<std::pair<int, int>> pairs() const;
};

/// Symmetric precision-matrix estimate with the tuning value that
/// produced it and the achieved off-diagonal density.
struct PrecisionEstimate {
  Matrix omega;
  double lambda = 0.0;
  double density = 0.0;  // fraction of nonzero off-diagonal entries
};

/// Fisher-transformed partial correlations in EdgeIndexMap order.
struct EdgeFeatureVector {
  Vector values;
};

}  // namespace sdncmv
