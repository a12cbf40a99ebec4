#pragma once

#include <Eigen/Dense>

namespace sdncmv::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Options {
  double pivot_tol = 1e-9;   // entries below this never pivot
  double cost_tol = 1e-9;    // reduced-cost optimality threshold
  double feas_tol = 1e-7;    // phase-1 objective above this means infeasible
  int max_iterations = 0;    // 0 picks a bound from the problem size
};

struct Result {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  Eigen::VectorXd x;            // structural variables at the final point
  double infeasibility = 0.0;   // phase-1 optimum when status == infeasible
  int iterations = 0;
};

/// Minimize c'x subject to A x <= b, x >= 0.
/// Dense two-phase primal simplex (Dantzig pricing, Bland fallback on
/// degenerate stalls). Sized for the small LPs CLIME produces: m and n
/// in the hundreds.
Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                const Eigen::VectorXd& c, const Options& opts = {});

}  // namespace sdncmv::lp
