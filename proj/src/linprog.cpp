#include "sdncmv/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sdncmv::lp {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tableau layout: columns [0, n) structural, [n, n+m) slacks,
// [n+m, n+m+n_art) artificials, last column rhs. Row m is the cost row
// with rhs holding -objective.
struct Tableau {
  RowMajorMatrix t;
  std::vector<int> basis;
  int m = 0;
  int n_total = 0;  // columns excluding rhs

  double rhs(int row) const { return t(row, n_total); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }
};

// Entering column, or -1 at optimality. `allowed` bars artificials in
// phase 2. Bland mode picks the lowest index to break cycling.
int price(const Tableau& tab, const std::vector<char>& allowed, double cost_tol, bool bland) {
  int best = -1;
  double best_cost = -cost_tol;
  for (int j = 0; j < tab.n_total; ++j) {
    if (!allowed[static_cast<std::size_t>(j)]) continue;
    const double c = tab.t(tab.m, j);
    if (c < best_cost) {
      if (bland) return j;
      best_cost = c;
      best = j;
    }
  }
  return best;
}

// Leaving row by minimum ratio, or -1 when the column is unbounded.
int ratio_test(const Tableau& tab, int col, double pivot_tol, bool bland) {
  int row = -1;
  double best_ratio = std::numeric_limits<double>::infinity();
  double best_pivot = 0.0;
  for (int r = 0; r < tab.m; ++r) {
    const double a = tab.t(r, col);
    if (a <= pivot_tol) continue;
    const double ratio = tab.rhs(r) / a;
    if (ratio < best_ratio - 1e-12) {
      best_ratio = ratio;
      row = r;
      best_pivot = a;
    } else if (ratio < best_ratio + 1e-12 && row >= 0) {
      if (bland) {
        if (tab.basis[static_cast<std::size_t>(r)] < tab.basis[static_cast<std::size_t>(row)]) {
          row = r;
          best_pivot = a;
        }
      } else if (a > best_pivot) {
        row = r;
        best_pivot = a;
      }
    }
  }
  return row;
}

// Returns final status of the iteration loop on the current cost row.
Status iterate(Tableau& tab, const std::vector<char>& allowed, const Options& opts,
               int max_iter, int& iterations) {
  int stall = 0;
  bool bland = false;
  double last_obj = -tab.rhs(tab.m);
  while (iterations < max_iter) {
    const int col = price(tab, allowed, opts.cost_tol, bland);
    if (col < 0) return Status::optimal;
    const int row = ratio_test(tab, col, opts.pivot_tol, bland);
    if (row < 0) return Status::unbounded;
    tab.pivot(row, col);
    ++iterations;
    const double obj = -tab.rhs(tab.m);
    if (obj < last_obj - 1e-12) {
      stall = 0;
      bland = false;
      last_obj = obj;
    } else if (++stall > tab.m + 16) {
      bland = true;  // degenerate stall; switch to Bland until progress
    }
  }
  return Status::iteration_limit;
}

}  // namespace

Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                const Eigen::VectorXd& c, const Options& opts) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n)
    throw std::invalid_argument("lp::minimize: inconsistent dimensions");

  // Count artificials: one per negative-rhs row.
  int n_art = 0;
  for (int r = 0; r < m; ++r) n_art += (b(r) < 0.0);

  Tableau tab;
  tab.m = m;
  tab.n_total = n + m + n_art;
  tab.t = RowMajorMatrix::Zero(m + 1, tab.n_total + 1);
  tab.basis.resize(static_cast<std::size_t>(m));

  int art = n + m;
  for (int r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    tab.t.row(r).head(n) = sign * A.row(r);
    tab.t(r, n + r) = sign;  // slack
    tab.t(r, tab.n_total) = sign * b(r);
    if (b(r) < 0.0) {
      tab.t(r, art) = 1.0;
      tab.basis[static_cast<std::size_t>(r)] = art++;
    } else {
      tab.basis[static_cast<std::size_t>(r)] = n + r;
    }
  }

  const int max_iter =
      opts.max_iterations > 0 ? opts.max_iterations : 200 * (m + n) + 2000;

  Result res;
  res.x = Eigen::VectorXd::Zero(n);

  std::vector<char> allowed(static_cast<std::size_t>(tab.n_total), 1);

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (int j = n + m; j < tab.n_total; ++j) tab.t(m, j) = 1.0;
    for (int r = 0; r < m; ++r) {
      const int bj = tab.basis[static_cast<std::size_t>(r)];
      if (bj >= n + m) tab.t.row(m) -= tab.t.row(r);
    }
    const Status st = iterate(tab, allowed, opts, max_iter, res.iterations);
    if (st == Status::iteration_limit) {
      res.status = st;
      return res;
    }
    const double phase1 = -tab.rhs(m);
    if (phase1 > opts.feas_tol) {
      res.status = Status::infeasible;
      res.infeasibility = phase1;
      return res;
    }
    // Drive any leftover basic artificials out where possible; a row with
    // no eligible pivot is redundant and its artificial stays at zero.
    for (int r = 0; r < m; ++r) {
      if (tab.basis[static_cast<std::size_t>(r)] < n + m) continue;
      for (int j = 0; j < n + m; ++j) {
        if (std::abs(tab.t(r, j)) > opts.pivot_tol) {
          tab.pivot(r, j);
          break;
        }
      }
    }
    for (int j = n + m; j < tab.n_total; ++j) allowed[static_cast<std::size_t>(j)] = 0;
  }

  // Phase 2: original costs, reduced against the current basis.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c.transpose();
  for (int r = 0; r < m; ++r) {
    const int bj = tab.basis[static_cast<std::size_t>(r)];
    const double cb = tab.t(m, bj);
    if (cb != 0.0) tab.t.row(m) -= cb * tab.t.row(r);
  }

  const Status st = iterate(tab, allowed, opts, max_iter, res.iterations);
  if (st != Status::optimal) {
    res.status = st;
    return res;
  }

  for (int r = 0; r < m; ++r) {
    const int bj = tab.basis[static_cast<std::size_t>(r)];
    if (bj < n) res.x(bj) = tab.rhs(r);
  }
  res.objective = c.dot(res.x);
  res.status = Status::optimal;
  return res;
}

}  // namespace sdncmv::lp
