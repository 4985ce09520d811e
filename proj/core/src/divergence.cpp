#include "cmdp/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double pseudo_kl(const VisitationDistribution& d1, const VisitationDistribution& d2) {
  if (d1.d.rows() != d2.d.rows() || d1.d.cols() != d2.d.cols())
    throw ValidationError("pseudo_kl: shape mismatch");
  const Eigen::VectorXd m1 = d1.marginal();
  const Eigen::VectorXd m2 = d2.marginal();
  double total = 0.0;
  for (int s = 0; s < d1.d.rows(); ++s) {
    if (m1(s) <= 0.0) continue;
    for (int a = 0; a < d1.d.cols(); ++a) {
      const double x = d1.d(s, a);
      if (x <= 0.0) continue;
      if (d2.d(s, a) <= 0.0)
        throw ValidationError("pseudo_kl: second distribution lacks support at state " +
                              std::to_string(s));
      total += x * (std::log(x / m1(s)) - std::log(d2.d(s, a) / m2(s)));
    }
  }
  return total;
}

double occupancy_potential(const VisitationDistribution& d) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.d.size(); ++i) total += xlogx(d.d.data()[i]);
  const Eigen::VectorXd m = d.marginal();
  for (int s = 0; s < m.size(); ++s) total -= xlogx(m(s));
  return total;
}

double occupancy_bregman(const VisitationDistribution& d1, const VisitationDistribution& d2) {
  // grad phi(d)(s,a) = log(d(s,a) / d(s))
  const Eigen::VectorXd m2 = d2.marginal();
  double inner = 0.0;
  for (int s = 0; s < d2.d.rows(); ++s)
    for (int a = 0; a < d2.d.cols(); ++a) {
      const double diff = d1.d(s, a) - d2.d(s, a);
      if (diff == 0.0) continue;
      if (d2.d(s, a) <= 0.0)
        throw ValidationError("occupancy_bregman: gradient undefined at state " +
                              std::to_string(s));
      inner += std::log(d2.d(s, a) / m2(s)) * diff;
    }
  return occupancy_potential(d1) - occupancy_potential(d2) - inner;
}

double visitation_distance_bound(const CmdpModel& model, const TabularPolicy& a,
                                 const TabularPolicy& b) {
  const Eigen::VectorXd da = visitation(model, a).marginal();
  const Eigen::VectorXd db = visitation(model, b).marginal();
  const double kl = std::min({expected_kl(da, a, b), expected_kl(da, b, a), expected_kl(db, a, b),
                              expected_kl(db, b, a)});
  const double g = model.gamma;
  return g * std::sqrt(2.0) / (1.0 - g) * std::sqrt(std::max(kl, 0.0));
}

double pushback_residual(const CmdpModel& model, const Eigen::MatrixXd& cost,
                         const TabularPolicy& minimizer, const TabularPolicy& any,
                         const TabularPolicy& ref, double alpha, double slack) {
  const double w = alpha / (1.0 - model.gamma);
  const Eigen::VectorXd d_min = visitation(model, minimizer).marginal();
  const Eigen::VectorXd d_any = visitation(model, any).marginal();
  const double lhs = value_at_rho(model, minimizer, cost) + w * expected_kl(d_min, minimizer, ref);
  const double rhs = value_at_rho(model, any, cost) + w * expected_kl(d_any, any, ref) -
                     w * expected_kl(d_any, any, minimizer);
  return std::max(0.0, lhs - rhs - slack);
}

}  // namespace cmdp
