#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the solvers they are used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cmdp/model.hpp"
#include "cmdp/policy.hpp"
#include "cmdp/rng.hpp"

namespace cmdp::testing {

/// Random strictly positive policy with logits ~ N(0, scale^2).
inline TabularPolicy random_policy(int S, int A, std::uint64_t seed, double scale = 1.0) {
  Engine eng(seed);
  Eigen::MatrixXd logits(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      // Box-Muller from two uniforms
      const double u1 = 1.0 - uniform01(eng);
      const double u2 = uniform01(eng);
      logits(s, a) = scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
  return TabularPolicy::from_logits(logits);
}

inline Eigen::MatrixXd random_cost(int S, int A, std::uint64_t seed) {
  Engine eng(seed);
  Eigen::MatrixXd c(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) c(s, a) = 2.0 * uniform01(eng) - 1.0;
  return c;
}

/// V by fixed-point iteration v <- c_pi + gamma P_pi v until the change is below tol.
inline Eigen::VectorXd series_value(const CmdpModel& m, const Eigen::MatrixXd& probs,
                                    const Eigen::MatrixXd& cost, double tol = 1e-14) {
  const int S = m.num_states, A = m.num_actions;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  for (int it = 0; it < 1000000; ++it) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int a = 0; a < A; ++a)
        acc += probs(s, a) * (cost(s, a) + m.gamma * m.transition.row(m.row(s, a)).dot(v));
      next(s) = acc;
    }
    const double diff = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (diff < tol) break;
  }
  return v;
}

/// min_pi V_cost^pi(rho) by plain value iteration.
inline double optimal_value_vi(const CmdpModel& m, const Eigen::MatrixXd& cost, double tol = 1e-14) {
  const int S = m.num_states, A = m.num_actions;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  for (int it = 0; it < 10000000; ++it) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a)
        best = std::min(best, cost(s, a) + m.gamma * m.transition.row(m.row(s, a)).dot(v));
      next(s) = best;
    }
    const double diff = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (diff < tol) break;
  }
  return m.rho.dot(v);
}

/// Optimum of the KL-regularised problem min_pi V_{cost + alpha log(pi/ref)} by
/// soft value iteration: V(s) = -alpha log Sum_a ref(a|s) exp(-(c + gamma P V)(s,a) / alpha).
struct SoftOptimum {
  Eigen::VectorXd v;
  Eigen::MatrixXd log_pi;
};
inline SoftOptimum soft_value_iteration(const CmdpModel& m, const Eigen::MatrixXd& log_ref,
                                        const Eigen::MatrixXd& cost, double alpha,
                                        double tol = 1e-13) {
  const int S = m.num_states, A = m.num_actions;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  Eigen::MatrixXd logits(S, A);
  for (int it = 0; it < 10000000; ++it) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a)
        logits(s, a) = log_ref(s, a) -
                       (cost(s, a) + m.gamma * m.transition.row(m.row(s, a)).dot(v)) / alpha;
      const double mx = logits.row(s).maxCoeff();
      const double lse = mx + std::log((logits.row(s).array() - mx).exp().sum());
      next(s) = -alpha * lse;
      logits.row(s).array() -= lse;
    }
    const double diff = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (diff < tol) break;
  }
  return {v, logits};
}

/// argmin_p <q, p> + (1/eta) KL(p || p_old) over the simplex, by gradient
/// descent on unconstrained logits with backtracking.
inline Eigen::VectorXd prox_minimizer(const Eigen::VectorXd& q, const Eigen::VectorXd& p_old,
                                      double eta) {
  const int n = static_cast<int>(q.size());
  auto softmax = [](const Eigen::VectorXd& z) {
    const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return Eigen::VectorXd(e / e.sum());
  };
  auto objective = [&](const Eigen::VectorXd& p) {
    double f = q.dot(p);
    for (int i = 0; i < n; ++i) f += p(i) * (std::log(p(i)) - std::log(p_old(i))) / eta;
    return f;
  };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  double step = 1.0;
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd p = softmax(z);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = q(i) + (std::log(p(i)) - std::log(p_old(i)) + 1.0) / eta;
    const Eigen::VectorXd grad = p.cwiseProduct(g) - p * p.dot(g);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15) break;
    const double f0 = objective(p);
    double t = step * 2.0;
    while (t > 1e-20 && objective(softmax(z - t * grad)) > f0 - 0.25 * t * grad.squaredNorm())
      t *= 0.5;
    z -= t * grad;
    step = t;
  }
  return softmax(z);
}

/// Brute-force LP: min c.x s.t. A x = b, x >= 0 over every basis, for tiny
/// problems with A of full row rank. Returns +inf when no basic feasible point exists.
inline double vertex_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  std::vector<int> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + m, 1);
  std::sort(pick.begin(), pick.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j)
      if (pick[j]) cols.push_back(j);
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A.col(cols[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.rank() < m) continue;
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-12) continue;
    double obj = 0.0;
    for (int i = 0; i < m; ++i) obj += c(cols[i]) * xb(i);
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace cmdp::testing
