#include "cmdp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

// Dense tableau: rows 0..R-1 hold constraints, row R the reduced costs; the
// last column is the right-hand side.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;
  int rows() const { return static_cast<int>(basis.size()); }
  int rhs() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < t.rows(); ++i) {
      if (i == r) continue;
      const double f = t(i, c);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[r] = c;
  }

  void price_out(const Eigen::VectorXd& cost) {
    const int obj = rows();
    t.row(obj).setZero();
    t.row(obj).head(cost.size()) = cost.transpose();
    for (int r = 0; r < rows(); ++r) {
      const double cb = t(obj, basis[r]);
      if (cb != 0.0) t.row(obj) -= cb * t.row(r);
    }
  }
};

enum class Outcome { optimal, unbounded };

// Bland's rule: lowest-index improving column, lowest-index leaving variable
// among ratio ties.
Outcome iterate(Tableau& tab, int num_columns, double tol, int& pivots) {
  const int obj = tab.rows();
  const int rhs = tab.rhs();
  for (;;) {
    int enter = -1;
    for (int c = 0; c < num_columns; ++c)
      if (tab.t(obj, c) < -tol) {
        enter = c;
        break;
      }
    if (enter < 0) return Outcome::optimal;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < tab.rows(); ++r) {
      const double a = tab.t(r, enter);
      if (a <= tol) continue;
      const double ratio = tab.t(r, rhs) / a;
      if (leave < 0 || ratio < best - tol) {
        leave = r;
        best = ratio;
      } else if (ratio <= best + tol && tab.basis[r] < tab.basis[leave]) {
        leave = r;
        best = std::min(best, ratio);
      }
    }
    if (leave < 0) return Outcome::unbounded;
    tab.pivot(leave, enter);
    ++pivots;
    if (pivots > 1000000) throw NumericalError("simplex: pivot limit exceeded");
  }
}

}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, double tolerance) {
  const int n = static_cast<int>(lp.cost.size());
  const int me = static_cast<int>(lp.b_eq.size());
  const int mu = static_cast<int>(lp.b_ub.size());
  if ((me > 0 && lp.a_eq.cols() != n) || lp.a_eq.rows() != me ||
      (mu > 0 && lp.a_ub.cols() != n) || lp.a_ub.rows() != mu)
    throw ValidationError("solve_simplex: inconsistent dimensions");

  const int R = me + mu;
  const int n_struct = n + mu;  // structural plus slack columns
  const int n_total = n_struct + R;
  // Equality form [A_eq 0; A_ub I] [x; s] = b, rows flipped to b >= 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(R, n_struct);
  Eigen::VectorXd b(R);
  if (me) a.block(0, 0, me, n) = lp.a_eq;
  if (mu) {
    a.block(me, 0, mu, n) = lp.a_ub;
    a.block(me, n, mu, mu).setIdentity();
  }
  if (me) b.head(me) = lp.b_eq;
  if (mu) b.tail(mu) = lp.b_ub;
  std::vector<double> sign(R, 1.0);
  for (int r = 0; r < R; ++r)
    if (b(r) < 0.0) {
      sign[r] = -1.0;
      a.row(r) *= -1.0;
      b(r) *= -1.0;
    }

  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(R + 1, n_total + 1);
  tab.t.block(0, 0, R, n_struct) = a;
  tab.t.block(0, n_struct, R, R).setIdentity();
  tab.t.col(n_total).head(R) = b;
  tab.basis.resize(R);
  for (int r = 0; r < R; ++r) tab.basis[r] = n_struct + r;

  LpSolution sol;
  // Phase 1: minimise the sum of artificials.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_total);
  phase1.tail(R).setOnes();
  tab.price_out(phase1);
  iterate(tab, n_total, tolerance, sol.pivots);
  const double infeas = -tab.t(R, n_total);
  if (infeas > std::max(1e-9, tolerance) * std::max(1.0, b.lpNorm<1>())) {
    sol.status = LpStatus::infeasible;
    return sol;
  }

  // Drive zero-level artificials out of the basis; drop redundant rows.
  std::vector<bool> redundant(R, false);
  for (int r = 0; r < R; ++r) {
    if (tab.basis[r] < n_struct) continue;
    int col = -1;
    for (int c = 0; c < n_struct; ++c)
      if (std::abs(tab.t(r, c)) > 1e-9) {
        col = c;
        break;
      }
    if (col >= 0) {
      tab.pivot(r, col);
      ++sol.pivots;
    } else {
      redundant[r] = true;
    }
  }
  // Remove artificial columns by zeroing them out of consideration; rows that
  // are redundant keep an artificial basic at level zero that never moves.
  for (int r = 0; r < R; ++r)
    if (redundant[r]) tab.t.row(r).head(n_struct).setZero();

  // Phase 2 over structural columns only.
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_total);
  phase2.head(n) = lp.cost;
  tab.price_out(phase2);
  if (iterate(tab, n_struct, tolerance, sol.pivots) == Outcome::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  // Recompute primal and dual values from a fresh factorisation of B.
  std::vector<int> live_rows, live_basis;
  for (int r = 0; r < R; ++r)
    if (!redundant[r]) {
      live_rows.push_back(r);
      live_basis.push_back(tab.basis[r]);
    }
  const int L = static_cast<int>(live_rows.size());
  Eigen::MatrixXd B(L, L);
  Eigen::VectorXd bl(L), cb(L);
  for (int i = 0; i < L; ++i) {
    bl(i) = b(live_rows[i]);
    for (int j = 0; j < L; ++j) B(i, j) = a(live_rows[i], live_basis[j]);
    cb(i) = live_basis[i] < n ? lp.cost(live_basis[i]) : 0.0;
  }
  const auto lu = B.partialPivLu();
  const Eigen::VectorXd xb = lu.solve(bl);
  const Eigen::VectorXd y = lu.transpose().solve(cb);

  Eigen::VectorXd xfull = Eigen::VectorXd::Zero(n_struct);
  for (int i = 0; i < L; ++i) xfull(live_basis[i]) = std::max(0.0, xb(i));
  sol.x = xfull.head(n);
  sol.objective = lp.cost.dot(sol.x);
  Eigen::VectorXd yfull = Eigen::VectorXd::Zero(R);
  for (int i = 0; i < L; ++i) yfull(live_rows[i]) = y(i) * sign[live_rows[i]];
  sol.dual_eq = yfull.head(me);
  sol.dual_ub = yfull.tail(mu);
  sol.status = LpStatus::optimal;
  return sol;
}

}  // namespace cmdp
