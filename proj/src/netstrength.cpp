#include "sdncmv/netstrength.hpp"

#include "sdncmv/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace sdncmv {
namespace {

constexpr double kDensityBand = 0.05;

// Constraint matrix of the split-variable CLIME program; shared by every
// column and every lambda for a fixed covariance.
Matrix assemble_clime_constraints(const Matrix& s) {
  const auto p = s.rows();
  Matrix a(2 * p, 2 * p);
  a.topLeftCorner(p, p) = s;
  a.topRightCorner(p, p) = -s;
  a.bottomLeftCorner(p, p) = -s;
  a.bottomRightCorner(p, p) = s;
  return a;
}

Vector clime_rhs(Eigen::Index p, int column, double lambda) {
  Vector b = Vector::Constant(2 * p, lambda);
  b(column) += 1.0;
  b(p + column) -= 1.0;
  return b;
}

Vector solve_clime_column(const Matrix& constraints, const Matrix& sigma_hat, int column,
                          double lambda, double lp_tolerance) {
  const auto p = sigma_hat.rows();
  lp::Options opts;
  opts.feas_tol = lp_tolerance;
  const lp::Result res = lp::minimize(constraints, clime_rhs(p, column, lambda),
                                      Vector::Ones(2 * p), opts);
  if (res.status == lp::Status::infeasible)
    throw ClimeInfeasibleError(column, lambda, min_feasible_lambda(sigma_hat, column));
  if (res.status != lp::Status::optimal)
    throw std::runtime_error("CLIME column " + std::to_string(column + 1) +
                             ": simplex did not converge");
  return res.x.head(p) - res.x.tail(p);
}

double offdiag_density(const Matrix& m, double zero_threshold) {
  const auto p = m.rows();
  if (p < 2) return 0.0;
  std::size_t nonzero = 0;
  for (Eigen::Index j = 1; j < p; ++j)
    for (Eigen::Index i = 0; i < j; ++i) nonzero += (std::abs(m(i, j)) > zero_threshold);
  return static_cast<double>(nonzero) / static_cast<double>(edge_count(static_cast<int>(p)));
}

PrecisionEstimate clime_assembled(const Matrix& constraints, const Matrix& sigma_hat,
                                  double lambda, const ClimeSettings& settings) {
  const auto p = sigma_hat.rows();
  Matrix raw(p, p);
  for (int i = 0; i < p; ++i)
    raw.col(i) = solve_clime_column(constraints, sigma_hat, i, lambda, settings.lp_tolerance);

  PrecisionEstimate est;
  est.omega = symmetrize_min_magnitude(raw);
  est.lambda = lambda;
  est.density = offdiag_density(est.omega, settings.zero_threshold);
  return est;
}

}  // namespace

void ClimeSettings::validate() const {
  if (target_density <= 0.0 || target_density >= 1.0)
    throw std::domain_error("target density must lie in (0,1)");
  if (lp_tolerance <= 0.0) throw std::domain_error("lp tolerance must be positive");
  if (max_bisection_steps < 1) throw std::domain_error("bisection step budget must be >= 1");
  if (zero_threshold < 0.0) throw std::domain_error("zero threshold must be >= 0");
}

ClimeInfeasibleError::ClimeInfeasibleError(int column_in, double lambda_in, double min_feasible)
    : std::runtime_error([&] {
        std::ostringstream ss;
        ss << "CLIME column " << column_in + 1 << " infeasible at lambda=" << lambda_in
           << "; smallest feasible lambda is about " << min_feasible;
        return ss.str();
      }()),
      column(column_in),
      lambda(lambda_in),
      min_feasible_lambda(min_feasible) {}

Matrix sample_cov(const Matrix& x) {
  const auto q = x.cols();
  if (q < 2) throw std::domain_error("sample_cov: need at least 2 time points");
  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  return (centered * centered.transpose()) / static_cast<double>(q - 1);
}

double min_feasible_lambda(const Matrix& sigma_hat, int column) {
  const auto p = sigma_hat.rows();
  // variables (beta+, beta-, t): minimize t with |sigma_hat beta - e_i| <= t
  Matrix a(2 * p, 2 * p + 1);
  a.topLeftCorner(p, p) = sigma_hat;
  a.topRightCorner(p, p + 1).leftCols(p) = -sigma_hat;
  a.bottomLeftCorner(p, p) = -sigma_hat;
  a.bottomRightCorner(p, p + 1).leftCols(p) = sigma_hat;
  a.col(2 * p).setConstant(-1.0);
  Vector b = Vector::Zero(2 * p);
  b(column) = 1.0;
  b(p + column) = -1.0;
  Vector c = Vector::Zero(2 * p + 1);
  c(2 * p) = 1.0;
  const lp::Result res = lp::minimize(a, b, c);
  if (res.status != lp::Status::optimal)
    throw std::runtime_error("feasibility probe LP failed");
  return res.objective;
}

Vector clime_column(const Matrix& sigma_hat, int column, double lambda, double lp_tolerance) {
  const auto p = sigma_hat.rows();
  if (sigma_hat.cols() != p) throw std::domain_error("clime: matrix must be square");
  if (column < 0 || column >= p) throw std::domain_error("clime: column out of range");
  if (lambda < 0.0) throw std::domain_error("clime: lambda must be >= 0");
  return solve_clime_column(assemble_clime_constraints(sigma_hat), sigma_hat, column, lambda,
                            lp_tolerance);
}

Matrix symmetrize_min_magnitude(const Matrix& m) {
  const auto p = m.rows();
  Matrix out = m;
  for (Eigen::Index j = 1; j < p; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = std::abs(m(i, j)) <= std::abs(m(j, i)) ? m(i, j) : m(j, i);
      out(i, j) = out(j, i) = v;
    }
  }
  return out;
}

PrecisionEstimate clime(const Matrix& sigma_hat, double lambda, const ClimeSettings& settings) {
  settings.validate();
  if (lambda < 0.0) throw std::domain_error("clime: lambda must be >= 0");
  return clime_assembled(assemble_clime_constraints(sigma_hat), sigma_hat, lambda, settings);
}

TuneResult tune_lambda_dens(const Matrix& sigma_hat, const ClimeSettings& settings) {
  settings.validate();
  const double target = settings.target_density;
  const Matrix constraints = assemble_clime_constraints(sigma_hat);

  TuneResult result;
  bool have_best = false;
  double best_gap = std::numeric_limits<double>::infinity();
  // closest-visited fallback for degenerate inputs where no estimate has
  // a strictly positive diagonal (downstream partial correlations need one)
  PrecisionEstimate fallback;
  bool have_fallback = false;
  double fallback_gap = std::numeric_limits<double>::infinity();

  struct Evaluation {
    std::optional<double> density;  // nullopt when lambda is infeasible
    bool in_band = false;           // eligible and within the target band
  };
  auto evaluate = [&](double lambda) -> Evaluation {
    PrecisionEstimate est;
    try {
      est = clime_assembled(constraints, sigma_hat, lambda, settings);
    } catch (const ClimeInfeasibleError&) {
      return {};
    }
    ++result.evaluations;
    const double density = est.density;
    const double gap = std::abs(density - target);
    const bool eligible = (est.omega.diagonal().array() > 0.0).all();
    if (eligible) {
      if (!have_best || gap < best_gap - 1e-12 ||
          (gap <= best_gap + 1e-12 && lambda > result.estimate.lambda)) {
        have_best = true;
        best_gap = gap;
        result.estimate = std::move(est);
      }
    } else if (!have_fallback || gap < fallback_gap - 1e-12 ||
               (gap <= fallback_gap + 1e-12 && lambda > fallback.lambda)) {
      have_fallback = true;
      fallback_gap = gap;
      fallback = std::move(est);
    }
    return {density, eligible && gap <= kDensityBand};
  };

  // every eligible in-band evaluation returns early, so reaching here
  // always means the target was not attained
  auto finish = [&]() -> TuneResult& {
    if (!have_best) {
      if (!have_fallback) throw ClimeInfeasibleError(0, settings.lp_tolerance, 0.0);
      result.estimate = std::move(fallback);
    }
    result.attainable = false;
    return result;
  };

  if (!settings.lambda_grid.empty()) {
    for (double lambda : settings.lambda_grid) {
      if (lambda < 0.0) throw std::domain_error("lambda grid entries must be >= 0");
      if (evaluate(lambda).in_band) {
        result.attainable = true;
        return result;
      }
    }
    return finish();
  }

  double lo = settings.lambda_lo > 0.0 ? settings.lambda_lo : settings.lp_tolerance;
  double hi = settings.lambda_hi > 0.0 ? settings.lambda_hi : sigma_hat.diagonal().maxCoeff();
  if (hi <= lo) hi = 2.0 * lo;

  // Feasibility grows with lambda, so an infeasible upper bound means the
  // whole interval is out of reach.
  const Evaluation eval_hi = evaluate(hi);
  if (!eval_hi.density) {
    throw ClimeInfeasibleError(0, hi, min_feasible_lambda(sigma_hat, 0));
  }
  if (eval_hi.in_band) {
    result.attainable = true;
    return result;
  }
  const Evaluation eval_lo = evaluate(lo);
  if (eval_lo.in_band) {
    result.attainable = true;
    return result;
  }

  for (int step = 0; step < settings.max_bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    const Evaluation eval = evaluate(mid);
    if (!eval.density) {
      lo = mid;  // lambda too small to be feasible
      continue;
    }
    if (eval.in_band) {
      result.attainable = true;
      return result;
    }
    if (*eval.density > target)
      lo = mid;
    else
      hi = mid;
  }
  return finish();
}

Matrix partial_corr(const Matrix& omega) {
  const Vector diag = omega.diagonal();
  if ((diag.array() <= 0.0).any())
    throw std::runtime_error("partial_corr: precision diagonal must be strictly positive");
  const Vector inv_sqrt = diag.array().sqrt().inverse();
  Matrix r = inv_sqrt.asDiagonal() * omega * inv_sqrt.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

EdgeFeatureVector fisher_features(const Matrix& r, const EdgeIndexMap& map) {
  if (r.rows() != map.p || r.cols() != map.p)
    throw std::domain_error("fisher_features: matrix size does not match edge map");
  constexpr double kClamp = 1.0 - 1e-6;
  EdgeFeatureVector out;
  out.values.resize(static_cast<Eigen::Index>(map.size()));
  for (int j = 2; j <= map.p; ++j) {
    for (int i = 1; i < j; ++i) {
      const double v = std::clamp(r(i - 1, j - 1), -kClamp, kClamp);
      out.values(static_cast<Eigen::Index>(map.flat(i, j))) =
          0.5 * std::log((1.0 + v) / (1.0 - v));
    }
  }
  return out;
}

SubjectFeatures subject_features(const SubjectMatrix& x, const ClimeSettings& settings) {
  const TuneResult tuned = tune_lambda_dens(sample_cov(x.data), settings);
  const Matrix r = partial_corr(tuned.estimate.omega);
  SubjectFeatures out;
  out.features = fisher_features(r, EdgeIndexMap(static_cast<int>(x.p())));
  out.estimate = tuned.estimate;
  out.density_attainable = tuned.attainable;
  return out;
}

}  // namespace sdncmv
