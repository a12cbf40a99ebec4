#pragma once

#include "sdncmv/core.hpp"

#include <stdexcept>
#include <vector>

namespace sdncmv {

struct ClimeSettings {
  double target_density = 0.5;        // desired fraction of nonzero off-diagonals
  double lp_tolerance = 1e-7;         // LP feasibility slack; also the lower lambda bound
  int max_bisection_steps = 30;
  double zero_threshold = 1e-8;       // |entry| at or below this counts as zero
  std::vector<double> lambda_grid;    // optional explicit grid (descending); empty -> bisection
  double lambda_lo = 0.0;             // optional bisection bound overrides (0 -> automatic)
  double lambda_hi = 0.0;

  void validate() const;
};

/// The constraint set ||sigma_hat * beta - e_i||_inf <= lambda is empty.
/// Carries an estimate of the smallest lambda that would be feasible.
struct ClimeInfeasibleError : std::runtime_error {
  ClimeInfeasibleError(int column, double lambda, double min_feasible);
  int column;               // 0-based
  double lambda;
  double min_feasible_lambda;
};

/// Per-subject spatial sample covariance over the q time columns,
/// centered at the column mean, divisor q - 1.
Matrix sample_cov(const Matrix& x);

/// Smallest lambda for which column i of the CLIME program is feasible:
/// min over beta of ||sigma_hat * beta - e_i||_inf.
double min_feasible_lambda(const Matrix& sigma_hat, int column);

/// One CLIME column: argmin ||beta||_1 subject to
/// ||sigma_hat * beta - e_i||_inf <= lambda, solved as a linear program
/// over the split beta = beta+ - beta-.
Vector clime_column(const Matrix& sigma_hat, int column, double lambda,
                    double lp_tolerance = 1e-7);

/// Min-magnitude symmetrization: entry (i,j) and (j,i) both become the
/// one of the pair with smaller absolute value (ties keep the i<j entry).
Matrix symmetrize_min_magnitude(const Matrix& m);

/// All p CLIME columns, symmetrized, with the achieved off-diagonal
/// density recorded.
PrecisionEstimate clime(const Matrix& sigma_hat, double lambda,
                        const ClimeSettings& settings = {});

struct TuneResult {
  PrecisionEstimate estimate;
  bool attainable = false;  // achieved |density - target| <= 0.05
  int evaluations = 0;
};

/// Bisection on lambda toward the target density. Returns the visited
/// lambda whose density lands closest to the target (ties prefer the
/// larger lambda); `attainable` reports whether the +-0.05 band was hit.
TuneResult tune_lambda_dens(const Matrix& sigma_hat, const ClimeSettings& settings = {});

/// R = D^{-1/2} Omega D^{-1/2} with unit diagonal.
Matrix partial_corr(const Matrix& omega);

/// Fisher transform of every off-diagonal of R, in EdgeIndexMap order.
/// Inputs are clamped to [-1 + 1e-6, 1 - 1e-6] first.
EdgeFeatureVector fisher_features(const Matrix& r, const EdgeIndexMap& map);

struct SubjectFeatures {
  EdgeFeatureVector features;
  PrecisionEstimate estimate;
  bool density_attainable = false;
};

/// Full first-stage pipeline for one subject:
/// sample_cov -> tune_lambda_dens -> partial_corr -> fisher_features.
SubjectFeatures subject_features(const SubjectMatrix& x, const ClimeSettings& settings = {});

}  // namespace sdncmv
