#include "sdncmv/plr.hpp"

#include "sdncmv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sdncmv {
namespace {

constexpr double kWeightFloor = 1e-6;
constexpr double kProbClamp = 1e-5;

double log1pexp(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

struct Coefficients {
  double intercept = 0.0;
  Vector eta;
  Vector beta;
};

Vector scores(const Coefficients& c, const Matrix& q, const Matrix& w, bool has_intercept) {
  Vector s = Vector::Constant(q.rows(), has_intercept ? c.intercept : 0.0);
  if (q.cols() > 0) s += q * c.eta;
  if (w.cols() > 0) s += w * c.beta;
  return s;
}

double smooth_loss(const Vector& s, const Vector& z) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) acc += -z(k) * s(k) + log1pexp(s(k));
  return acc / static_cast<double>(s.size());
}

double penalty(const Vector& beta, double lambda, double alpha) {
  return lambda * (alpha * beta.lpNorm<1>() + (1.0 - alpha) * beta.squaredNorm());
}

double objective(const Coefficients& c, const Matrix& q, const Matrix& w, const Vector& z,
                 double lambda, double alpha, bool has_intercept) {
  return smooth_loss(scores(c, q, w, has_intercept), z) + penalty(c.beta, lambda, alpha);
}

double kkt_violation_impl(const Coefficients& c, const Matrix& q, const Matrix& w,
                          const Vector& z, double lambda, double alpha, bool has_intercept) {
  const auto n = static_cast<double>(z.size());
  const Vector s = scores(c, q, w, has_intercept);
  Vector resid(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) resid(k) = sigmoid(s(k)) - z(k);
  double worst = 0.0;
  if (has_intercept) worst = std::abs(resid.sum() / n);
  for (Eigen::Index m = 0; m < q.cols(); ++m)
    worst = std::max(worst, std::abs(q.col(m).dot(resid) / n));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    const double g = w.col(j).dot(resid) / n;
    const double b = c.beta(j);
    if (b == 0.0)
      worst = std::max(worst, std::max(0.0, std::abs(g) - lambda * alpha));
    else
      worst = std::max(worst,
                       std::abs(g + 2.0 * lambda * (1.0 - alpha) * b +
                                lambda * alpha * (b > 0.0 ? 1.0 : -1.0)));
  }
  return worst;
}

// One penalized weighted least-squares solve by coordinate descent,
// then a backtracked step to keep the true objective non-increasing.
// Returns the largest coefficient change of the accepted step.
double irls_round(Coefficients& c, const Matrix& q, const Matrix& w, const Vector& z,
                  double lambda, double alpha, bool has_intercept, double tol) {
  const auto n = static_cast<double>(z.size());
  Vector s = scores(c, q, w, has_intercept);
  Vector weight(z.size()), working(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double mu = sigmoid(s(k));
    const double v = std::max(mu * (1.0 - mu), kWeightFloor);
    weight(k) = v;
    working(k) = s(k) + (z(k) - mu) / v;
  }

  const Coefficients before = c;
  const double obj_before = objective(before, q, w, z, lambda, alpha, has_intercept);

  // coordinate descent on the weighted quadratic surrogate
  Vector r = working - s;  // residual against the current score
  const int max_sweeps = 1000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    if (has_intercept) {
      const double delta = weight.dot(r) / weight.sum();
      c.intercept += delta;
      r.array() -= delta;
      max_delta = std::max(max_delta, std::abs(delta));
    }
    for (Eigen::Index m = 0; m < q.cols(); ++m) {
      const auto col = q.col(m);
      const double denom = col.cwiseProduct(col).dot(weight) / n;
      if (denom <= 0.0) continue;
      const double num = col.cwiseProduct(weight).dot(r) / n;
      const double delta = num / denom;
      c.eta(m) += delta;
      r -= delta * col;
      max_delta = std::max(max_delta, std::abs(delta));
    }
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const auto col = w.col(j);
      const double a = col.cwiseProduct(col).dot(weight) / n;
      const double denom = a + 2.0 * lambda * (1.0 - alpha);
      if (denom <= 0.0) continue;
      const double num = col.cwiseProduct(weight).dot(r) / n + a * c.beta(j);
      const double updated = soft_threshold(num, lambda * alpha) / denom;
      const double delta = updated - c.beta(j);
      if (delta != 0.0) {
        c.beta(j) = updated;
        r -= delta * col;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) break;
  }

  // backtrack toward the previous iterate if the quadratic step overshot
  double step = 1.0;
  Coefficients candidate = c;
  while (step > 1e-8) {
    if (objective(candidate, q, w, z, lambda, alpha, has_intercept) <= obj_before + 1e-12) break;
    step *= 0.5;
    candidate.intercept = before.intercept + step * (c.intercept - before.intercept);
    candidate.eta = before.eta + step * (c.eta - before.eta);
    candidate.beta = before.beta + step * (c.beta - before.beta);
  }
  if (step <= 1e-8) candidate = before;
  double moved = std::abs(candidate.intercept - before.intercept);
  for (Eigen::Index m = 0; m < before.eta.size(); ++m)
    moved = std::max(moved, std::abs(candidate.eta(m) - before.eta(m)));
  for (Eigen::Index j = 0; j < before.beta.size(); ++j)
    moved = std::max(moved, std::abs(candidate.beta(j) - before.beta(j)));
  c = candidate;
  return moved;
}

Coefficients fit_impl(const Matrix& q, const Matrix& w, const Vector& z, double lambda,
                      double alpha, const PlrFitSettings& settings, Coefficients start,
                      bool* converged_out, double* kkt_out) {
  Coefficients c = std::move(start);
  bool converged = false;
  if (settings.objective_trace)
    settings.objective_trace->push_back(
        objective(c, q, w, z, lambda, alpha, settings.fit_intercept));
  for (int it = 0; it < settings.max_iterations; ++it) {
    const double moved =
        irls_round(c, q, w, z, lambda, alpha, settings.fit_intercept, settings.tolerance);
    if (settings.objective_trace)
      settings.objective_trace->push_back(
          objective(c, q, w, z, lambda, alpha, settings.fit_intercept));
    if (moved < settings.tolerance) {
      converged = true;
      break;
    }
  }
  const double kkt = kkt_violation_impl(c, q, w, z, lambda, alpha, settings.fit_intercept);
  if (converged_out) *converged_out = converged || kkt <= 1e-4;
  if (kkt_out) *kkt_out = kkt;
  return c;
}

Vector to_double(const Eigen::VectorXi& labels) {
  Vector z(labels.size());
  for (Eigen::Index k = 0; k < labels.size(); ++k) {
    if (labels(k) != 0 && labels(k) != 1) throw std::domain_error("labels must be 0 or 1");
    z(k) = labels(k);
  }
  return z;
}

void check_design(const Matrix& q, const Matrix& w, const Eigen::VectorXi& labels) {
  if (q.rows() != labels.size() || w.rows() != labels.size())
    throw std::domain_error("design matrices and labels disagree on the subject count");
  if (!q.allFinite() || !w.allFinite())
    throw std::domain_error("design matrices contain non-finite values");
}

PlrModel to_model(Coefficients c, double lambda, double alpha, bool has_intercept) {
  PlrModel model;
  model.intercept = has_intercept ? c.intercept : 0.0;
  model.has_intercept = has_intercept;
  model.eta = std::move(c.eta);
  model.beta = std::move(c.beta);
  model.lambda = lambda;
  model.alpha = alpha;
  model.feature_index.resize(static_cast<std::size_t>(model.beta.size()));
  std::iota(model.feature_index.begin(), model.feature_index.end(), 0);
  return model;
}

Coefficients zero_start(Eigen::Index m, Eigen::Index d) {
  Coefficients c;
  c.eta = Vector::Zero(m);
  c.beta = Vector::Zero(d);
  return c;
}

double binomial_deviance(const Vector& prob, const Vector& z) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double mu = std::clamp(prob(k), kProbClamp, 1.0 - kProbClamp);
    acc += -2.0 * (z(k) * std::log(mu) + (1.0 - z(k)) * std::log1p(-mu));
  }
  return acc;
}

std::vector<double> make_lambda_path(const Matrix& q, const Matrix& w, const Vector& z,
                                     double alpha, const PlrFitSettings& settings) {
  // lambda_max: smallest penalty zeroing every beta, computed at the
  // confounder-only optimum.
  Coefficients base = fit_impl(q, Matrix(z.size(), 0), z, 0.0, 1.0, settings,
                               zero_start(q.cols(), 0), nullptr, nullptr);
  const Vector s = scores(base, q, Matrix(z.size(), 0), settings.fit_intercept);
  const auto n = static_cast<double>(z.size());
  double max_score = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    double g = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) g += w(k, j) * (z(k) - sigmoid(s(k)));
    max_score = std::max(max_score, std::abs(g) / n);
  }
  const double alpha_floor = std::max(alpha, 1e-3);
  const double lambda_max = std::max(max_score / alpha_floor, 1e-10);
  double ratio = settings.lambda_min_ratio;
  if (ratio <= 0.0) ratio = w.cols() >= z.size() ? 1e-2 : 1e-4;

  std::vector<double> path(static_cast<std::size_t>(settings.lambda_path_length));
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * ratio);
  const auto steps = static_cast<double>(settings.lambda_path_length - 1);
  for (int i = 0; i < settings.lambda_path_length; ++i)
    path[static_cast<std::size_t>(i)] =
        std::exp(log_max + (log_min - log_max) * static_cast<double>(i) / steps);
  return path;
}

}  // namespace

std::vector<std::size_t> PlrModel::support() const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) out.push_back(static_cast<std::size_t>(j));
  return out;
}

void PlrFitSettings::validate() const {
  if (max_iterations < 1) throw std::domain_error("max_iterations must be >= 1");
  if (tolerance <= 0.0) throw std::domain_error("tolerance must be positive");
  if (lambda_path_length < 2) throw std::domain_error("lambda path needs >= 2 values");
  if (alpha_grid.empty()) throw std::domain_error("alpha grid must be nonempty");
  for (double a : alpha_grid)
    if (a < 0.0 || a > 1.0) throw std::domain_error("alpha values must lie in [0,1]");
  if (cv_folds < 2) throw std::domain_error("cv_folds must be >= 2");
}

PlrConvergenceError::PlrConvergenceError(PlrModel last_iterate, double kkt)
    : std::runtime_error("penalized logistic fit did not converge; max KKT residual " +
                         std::to_string(kkt)),
      last(std::move(last_iterate)),
      kkt_violation(kkt) {}

double plr_objective(const PlrModel& model, const Matrix& confounders, const Matrix& features,
                     const Eigen::VectorXi& labels) {
  check_design(confounders, features, labels);
  if (model.eta.size() != confounders.cols() || model.beta.size() != features.cols())
    throw std::domain_error("model dimensions do not match the design");
  Coefficients c{model.intercept, model.eta, model.beta};
  return objective(c, confounders, features, to_double(labels), model.lambda, model.alpha,
                   model.has_intercept);
}

double plr_kkt_violation(const PlrModel& model, const Matrix& confounders,
                         const Matrix& features, const Eigen::VectorXi& labels) {
  check_design(confounders, features, labels);
  Coefficients c{model.intercept, model.eta, model.beta};
  return kkt_violation_impl(c, confounders, features, to_double(labels), model.lambda,
                            model.alpha, model.has_intercept);
}

PlrModel fit_plr(const Matrix& confounders, const Matrix& features, const Eigen::VectorXi& labels,
                 double lambda, double alpha, const PlrFitSettings& settings) {
  settings.validate();
  check_design(confounders, features, labels);
  if (lambda < 0.0) throw std::domain_error("lambda must be >= 0");
  if (alpha < 0.0 || alpha > 1.0) throw std::domain_error("alpha must lie in [0,1]");
  const Vector z = to_double(labels);
  if (labels.size() < 2 || z.sum() == 0.0 || z.sum() == static_cast<double>(z.size()))
    throw std::domain_error("training needs at least one subject of each class");

  bool converged = false;
  double kkt = 0.0;
  Coefficients c = fit_impl(confounders, features, z, lambda, alpha, settings,
                            zero_start(confounders.cols(), features.cols()), &converged, &kkt);
  PlrModel model = to_model(std::move(c), lambda, alpha, settings.fit_intercept);
  if (!converged) throw PlrConvergenceError(std::move(model), kkt);
  return model;
}

double predict_proba(const PlrModel& model, const Vector& confounders, const Vector& features) {
  if (confounders.size() != model.eta.size() || features.size() != model.beta.size())
    throw std::domain_error("prediction inputs do not match model dimensions");
  double s = model.has_intercept ? model.intercept : 0.0;
  s += model.eta.dot(confounders) + model.beta.dot(features);
  return sigmoid(s);
}

Vector predict_proba(const PlrModel& model, const Matrix& confounders, const Matrix& features) {
  if (confounders.cols() != model.eta.size() || features.cols() != model.beta.size() ||
      confounders.rows() != features.rows())
    throw std::domain_error("prediction inputs do not match model dimensions");
  Vector out(features.rows());
  for (Eigen::Index k = 0; k < features.rows(); ++k) {
    double s = model.has_intercept ? model.intercept : 0.0;
    if (confounders.cols() > 0) s += confounders.row(k).dot(model.eta);
    if (features.cols() > 0) s += features.row(k).dot(model.beta);
    out(k) = sigmoid(s);
  }
  return out;
}

std::vector<int> stratified_folds(const Eigen::VectorXi& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::domain_error("need at least 2 folds");
  std::vector<int> assignment(static_cast<std::size_t>(labels.size()), -1);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (Eigen::Index k = 0; k < labels.size(); ++k)
      if (labels(k) == cls) idx.push_back(static_cast<std::size_t>(k));
    if (static_cast<int>(idx.size()) < folds)
      throw std::domain_error("stratified folding needs every fold to hold both classes");
    Rng rng = Rng::stream(seed, rng_domain::cv_folds, static_cast<std::uint64_t>(cls));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(i))]);
    for (std::size_t i = 0; i < idx.size(); ++i)
      assignment[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return assignment;
}

CvTuneResult cv_tune(const Matrix& confounders, const Matrix& features,
                     const Eigen::VectorXi& labels, const PlrFitSettings& settings,
                     std::uint64_t fold_seed) {
  PlrFitSettings inner = settings;
  inner.objective_trace = nullptr;  // tracing is for direct fits only
  inner.validate();
  check_design(confounders, features, labels);
  const Vector z = to_double(labels);
  const auto n = labels.size();
  if (n < inner.cv_folds) throw std::domain_error("fewer subjects than folds");

  const std::vector<int> fold_of = stratified_folds(labels, inner.cv_folds, fold_seed);

  CvTuneResult best;
  double best_deviance = std::numeric_limits<double>::infinity();
  bool first_alpha = true;

  for (double alpha : inner.alpha_grid) {
    const std::vector<double> path = make_lambda_path(confounders, features, z, alpha, inner);
    if (first_alpha) best.lambda_path = path;
    first_alpha = false;

    std::vector<double> deviance_sum(path.size(), 0.0);
    for (int fold = 0; fold < inner.cv_folds; ++fold) {
      std::vector<Eigen::Index> train_rows, held_rows;
      for (Eigen::Index k = 0; k < n; ++k)
        (fold_of[static_cast<std::size_t>(k)] == fold ? held_rows : train_rows).push_back(k);

      Matrix q_tr(train_rows.size(), confounders.cols());
      Matrix w_tr(train_rows.size(), features.cols());
      Vector z_tr(train_rows.size());
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        q_tr.row(static_cast<Eigen::Index>(r)) = confounders.row(train_rows[r]);
        w_tr.row(static_cast<Eigen::Index>(r)) = features.row(train_rows[r]);
        z_tr(static_cast<Eigen::Index>(r)) = z(train_rows[r]);
      }
      Matrix q_ho(held_rows.size(), confounders.cols());
      Matrix w_ho(held_rows.size(), features.cols());
      Vector z_ho(held_rows.size());
      for (std::size_t r = 0; r < held_rows.size(); ++r) {
        q_ho.row(static_cast<Eigen::Index>(r)) = confounders.row(held_rows[r]);
        w_ho.row(static_cast<Eigen::Index>(r)) = features.row(held_rows[r]);
        z_ho(static_cast<Eigen::Index>(r)) = z(held_rows[r]);
      }

      Coefficients warm = zero_start(confounders.cols(), features.cols());
      for (std::size_t li = 0; li < path.size(); ++li) {
        warm = fit_impl(q_tr, w_tr, z_tr, path[li], alpha, inner, std::move(warm), nullptr,
                        nullptr);
        Vector prob(z_ho.size());
        for (Eigen::Index k = 0; k < z_ho.size(); ++k) {
          double s = inner.fit_intercept ? warm.intercept : 0.0;
          if (q_ho.cols() > 0) s += q_ho.row(k).dot(warm.eta);
          if (w_ho.cols() > 0) s += w_ho.row(k).dot(warm.beta);
          prob(k) = sigmoid(s);
        }
        deviance_sum[li] += binomial_deviance(prob, z_ho);
      }
    }

    for (std::size_t li = 0; li < path.size(); ++li) {
      const double mean_dev = deviance_sum[li] / static_cast<double>(n);
      if (mean_dev < best_deviance) {
        best_deviance = mean_dev;
        best.alpha = alpha;
        best.lambda = path[li];
      }
    }
  }

  best.mean_deviance = best_deviance;
  best.model = fit_plr(confounders, features, labels, best.lambda, best.alpha, inner);
  return best;
}

}  // namespace sdncmv
