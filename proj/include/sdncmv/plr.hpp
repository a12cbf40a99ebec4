#pragma once

#include "sdncmv/core.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sdncmv {

/// Fitted elastic-net logistic model. Confounder coefficients eta and the
/// intercept are never penalized; the penalty on beta is
/// lambda * (alpha * ||beta||_1 + (1 - alpha) * ||beta||_2^2).
struct PlrModel {
  double intercept = 0.0;
  bool has_intercept = true;
  Vector eta;   // length M
  Vector beta;  // length d
  double lambda = 0.0;
  double alpha = 1.0;
  std::vector<std::size_t> feature_index;  // beta position -> edge flat index

  std::vector<std::size_t> support() const;  // beta positions with nonzero coefficient
};

struct PlrFitSettings {
  int max_iterations = 100;    // outer reweighting rounds
  double tolerance = 1e-7;     // max coefficient change declaring convergence
  int lambda_path_length = 50;
  double lambda_min_ratio = 0.0;  // 0 -> 0.01 when d >= n, else 1e-4
  std::vector<double> alpha_grid = {0.25, 0.5, 0.75, 1.0};
  int cv_folds = 5;
  bool fit_intercept = true;
  // when set, fit_plr appends the exact objective before the first and
  // after every outer round
  std::vector<double>* objective_trace = nullptr;

  void validate() const;
};

/// Coordinate descent stopped at max_iterations with KKT residuals above
/// tolerance. Carries the last iterate.
struct PlrConvergenceError : std::runtime_error {
  PlrConvergenceError(PlrModel last_iterate, double kkt);
  PlrModel last;
  double kkt_violation;
};

/// Exact penalized objective:
/// (1/n) sum_k [-z_k s_k + log(1 + exp(s_k))] + lambda (alpha ||beta||_1
/// + (1-alpha) ||beta||_2^2), with s_k the linear score of row k.
double plr_objective(const PlrModel& model, const Matrix& confounders, const Matrix& features,
                     const Eigen::VectorXi& labels);

/// Max KKT residual of the fitted model: subgradient optimality for each
/// beta coordinate, plain gradient for eta and the intercept.
double plr_kkt_violation(const PlrModel& model, const Matrix& confounders,
                         const Matrix& features, const Eigen::VectorXi& labels);

/// Penalized fit by iteratively reweighted least squares with
/// coordinate-wise soft-thresholding on beta. Rows of `confounders` and
/// `features` are subjects.
PlrModel fit_plr(const Matrix& confounders, const Matrix& features, const Eigen::VectorXi& labels,
                 double lambda, double alpha, const PlrFitSettings& settings = {});

double predict_proba(const PlrModel& model, const Vector& confounders, const Vector& features);
Vector predict_proba(const PlrModel& model, const Matrix& confounders, const Matrix& features);

/// Deterministic stratified fold labels in [0, folds); every fold holds
/// both classes or a domain error is raised.
std::vector<int> stratified_folds(const Eigen::VectorXi& labels, int folds, std::uint64_t seed);

struct CvTuneResult {
  double lambda = 0.0;
  double alpha = 1.0;
  PlrModel model;           // refit on the full data at (lambda, alpha)
  double mean_deviance = 0.0;
  std::vector<double> lambda_path;
};

/// Grid search over alpha_grid x an automatic descending lambda path,
/// scored by mean held-out binomial deviance over stratified folds, then
/// refit on the full data.
CvTuneResult cv_tune(const Matrix& confounders, const Matrix& features,
                     const Eigen::VectorXi& labels, const PlrFitSettings& settings,
                     std::uint64_t fold_seed);

}  // namespace sdncmv
