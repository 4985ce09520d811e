#include "cmdp/ground_truth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cmdp/errors.hpp"
#include "cmdp/history.hpp"
#include "cmdp/simplex.hpp"

namespace cmdp {

namespace {

// Occupancy LP skeleton: flow equalities over d(s,a), index s * |A| + a.
LinearProgram flow_lp(const CmdpModel& model, int extra_columns) {
  const int S = model.num_states;
  const int A = model.num_actions;
  const int n = S * A + extra_columns;
  LinearProgram lp;
  lp.a_eq = Eigen::MatrixXd::Zero(S, n);
  lp.b_eq = (1.0 - model.gamma) * model.rho;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const int col = model.row(s, a);
      lp.a_eq(s, col) += 1.0;
      for (int sp = 0; sp < S; ++sp) lp.a_eq(sp, col) -= model.gamma * model.transition(col, sp);
    }
  lp.cost = Eigen::VectorXd::Zero(n);
  return lp;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& c) {
  Eigen::VectorXd out(c.size());
  for (int s = 0; s < c.rows(); ++s)
    for (int a = 0; a < c.cols(); ++a) out(s * c.cols() + a) = c(s, a);
  return out;
}

// min_pi V_cost^pi(rho): value iteration to 1e-12, then policy iteration on
// the greedy policy so the returned value is that of an exact deterministic
// optimum.
double optimal_value(const CmdpModel& model, const Eigen::MatrixXd& cost) {
  const int S = model.num_states;
  const int A = model.num_actions;
  const double g = model.gamma;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  auto backup = [&](const Eigen::VectorXd& vv) {
    const Eigen::VectorXd pv = model.transition * vv;
    Eigen::MatrixXd q(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) q(s, a) = cost(s, a) + g * pv(model.row(s, a));
    return q;
  };
  for (int it = 0; it < 100000; ++it) {
    const Eigen::VectorXd next = backup(v).rowwise().minCoeff();
    const double change = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (change <= 1e-12 * (1.0 - g)) break;
  }
  std::vector<int> act(S);
  {
    const Eigen::MatrixXd q = backup(v);
    for (int s = 0; s < S; ++s) q.row(s).minCoeff(&act[s]);
  }
  for (int round = 0; round < 1000; ++round) {
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
    Eigen::VectorXd c(S);
    for (int s = 0; s < S; ++s) {
      system.row(s) -= g * model.transition.row(model.row(s, act[s]));
      c(s) = cost(s, act[s]);
    }
    v = system.partialPivLu().solve(c);
    const Eigen::MatrixXd q = backup(v);
    bool changed = false;
    for (int s = 0; s < S; ++s) {
      int best;
      const double qb = q.row(s).minCoeff(&best);
      if (qb < q(s, act[s]) - 1e-13 * std::max(1.0, std::abs(qb))) {
        act[s] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return model.rho.dot(v);
}

double lagrangian_min(const CmdpModel& model, const Eigen::VectorXd& lambda) {
  Eigen::MatrixXd cost = model.objective_cost;
  for (int i = 0; i < model.num_constraints(); ++i) cost += lambda(i) * model.constraint_costs[i];
  return optimal_value(model, cost);
}

}  // namespace

TabularPolicy GroundTruth::optimal_policy(double floor) const {
  const Eigen::MatrixXd& d = d_star.d;
  Eigen::MatrixXd logits(d.rows(), d.cols());
  for (int s = 0; s < d.rows(); ++s) {
    const double mass = d.row(s).sum();
    for (int a = 0; a < d.cols(); ++a)
      logits(s, a) = mass > 0.0 ? std::log(std::max(d(s, a) / mass, floor)) : 0.0;
  }
  return TabularPolicy::from_logits(logits);
}

GroundTruth solve_lp(const CmdpModel& model) {
  require_valid(model);
  const int S = model.num_states;
  const int A = model.num_actions;
  const int m = model.num_constraints();
  const double scale = 1.0 / (1.0 - model.gamma);
  LinearProgram lp = flow_lp(model, 0);
  lp.cost = scale * flatten(model.objective_cost);
  lp.a_ub.resize(m, S * A);
  lp.b_ub = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) lp.a_ub.row(i) = scale * flatten(model.constraint_costs[i]).transpose();

  const LpSolution sol = solve_simplex(lp);
  GroundTruth gt;
  gt.xi = slater_margin(model);
  if (sol.status != LpStatus::optimal) {
    gt.status = SolveStatus::infeasible;
    return gt;
  }
  gt.status = SolveStatus::optimal;
  gt.optimal_value = sol.objective;
  gt.d_star.d.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) gt.d_star.d(s, a) = sol.x(model.row(s, a));
  gt.lambda_star = (-sol.dual_ub).cwiseMax(0.0);
  return gt;
}

double slater_margin(const CmdpModel& model) {
  const int m = model.num_constraints();
  if (m == 0) return std::numeric_limits<double>::infinity();
  const int n = model.num_pairs();
  const double scale = 1.0 / (1.0 - model.gamma);
  // Variables d, t+, t-; maximise t = t+ - t-.
  LinearProgram lp = flow_lp(model, 2);
  lp.cost(n) = -1.0;
  lp.cost(n + 1) = 1.0;
  lp.a_ub = Eigen::MatrixXd::Zero(m, n + 2);
  lp.b_ub = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    lp.a_ub.row(i).head(n) = scale * flatten(model.constraint_costs[i]).transpose();
    lp.a_ub(i, n) = 1.0;
    lp.a_ub(i, n + 1) = -1.0;
  }
  const LpSolution sol = solve_simplex(lp);
  if (sol.status != LpStatus::optimal) throw NumericalError("slater_margin: LP did not solve");
  return -sol.objective;
}

double KktResiduals::max() const {
  return std::max({flow, primal_infeasibility, slackness, dual_infeasibility});
}

KktResiduals kkt_residuals(const CmdpModel& model, const GroundTruth& gt) {
  if (gt.status != SolveStatus::optimal) throw ValidationError("kkt_residuals: no optimal solution");
  KktResiduals r;
  const Eigen::MatrixXd& d = gt.d_star.d;
  const double scale = 1.0 / (1.0 - model.gamma);
  r.flow = flow_residual(model, d);
  r.primal_infeasibility = std::max(0.0, -d.minCoeff());
  double lagrangian = scale * (d.array() * model.objective_cost.array()).sum();
  for (int i = 0; i < model.num_constraints(); ++i) {
    const double v = scale * (d.array() * model.constraint_costs[i].array()).sum();
    r.primal_infeasibility = std::max(r.primal_infeasibility, v);
    r.slackness = std::max(r.slackness, std::abs(gt.lambda_star(i) * v));
    lagrangian += gt.lambda_star(i) * v;
  }
  // d* must minimise the Lagrangian at lambda*: compare with the exact minimum.
  r.dual_infeasibility = std::abs(lagrangian - lagrangian_min(model, gt.lambda_star));
  return r;
}

double lagrange_dual_function(const CmdpModel& model, double lambda) {
  if (model.num_constraints() != 1)
    throw ValidationError("lagrange_dual_function: requires exactly one constraint");
  return optimal_value(model, model.objective_cost + lambda * model.constraint_costs[0]);
}

DualBisectionResult dual_bisection(const CmdpModel& model) {
  require_valid(model);
  if (model.num_constraints() != 1) throw ValidationError("dual_bisection: requires m = 1");
  const double xi_hat = -optimal_value(model, model.constraint_costs[0]);
  if (!(xi_hat > 0.0))
    throw ValidationError("dual_bisection: no strictly feasible policy (margin " +
                          std::to_string(xi_hat) + ")");
  double hi = 4.0 * model.cost_scale / (xi_hat * (1.0 - model.gamma));
  constexpr double kInvPhi = 0.6180339887498949;
  const auto G = [&](double l) { return lagrange_dual_function(model, l); };
  for (int attempt = 0; attempt < 2; ++attempt) {
    double lo = 0.0, up = hi;
    double x1 = up - kInvPhi * (up - lo), x2 = lo + kInvPhi * (up - lo);
    double g1 = G(x1), g2 = G(x2);
    while (up - lo > 1e-9) {
      if (g1 < g2) {
        lo = x1;
        x1 = x2;
        g1 = g2;
        x2 = lo + kInvPhi * (up - lo);
        g2 = G(x2);
      } else {
        up = x2;
        x2 = x1;
        g2 = g1;
        x1 = up - kInvPhi * (up - lo);
        g1 = G(x1);
      }
    }
    double best = 0.5 * (lo + up);
    double g_best = G(best);
    const double g0 = G(0.0);
    if (g0 >= g_best) {
      best = 0.0;
      g_best = g0;
    }
    if (best < hi * (1.0 - 1e-6)) return {g_best, best, hi};
    hi *= 4.0;  // maximiser sits on the bracket edge
  }
  throw NumericalError("dual_bisection: maximiser not bracketed after widening");
}

std::string ground_truth_to_json(const GroundTruth& gt) {
  std::ostringstream os;
  os << "{\n  \"status\": \"" << (gt.status == SolveStatus::optimal ? "optimal" : "infeasible")
     << "\",\n  \"optimal_value\": " << format_decimal(gt.optimal_value) << ",\n  \"xi\": ";
  if (std::isinf(gt.xi))
    os << "\"inf\"";
  else
    os << format_decimal(gt.xi);
  os << ",\n  \"lambda_star\": [";
  for (int i = 0; i < gt.lambda_star.size(); ++i)
    os << (i ? "," : "") << format_decimal(gt.lambda_star(i));
  os << "],\n  \"d_star\": [";
  for (int s = 0; s < gt.d_star.d.rows(); ++s) {
    os << (s ? "," : "") << '[';
    for (int a = 0; a < gt.d_star.d.cols(); ++a)
      os << (a ? "," : "") << format_decimal(gt.d_star.d(s, a));
    os << ']';
  }
  os << "]\n}\n";
  return os.str();
}

GroundTruth ground_truth_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("ground-truth file: malformed JSON: ") + e.what());
  }
  for (const char* k : {"status", "optimal_value", "xi", "lambda_star", "d_star"})
    if (!j.contains(k))
      throw ValidationError(std::string("ground-truth file: missing key \"") + k + "\"");
  GroundTruth gt;
  gt.status = j["status"] == "optimal" ? SolveStatus::optimal : SolveStatus::infeasible;
  gt.optimal_value = j["optimal_value"].get<double>();
  gt.xi = j["xi"].is_string() ? std::numeric_limits<double>::infinity() : j["xi"].get<double>();
  const auto& ls = j["lambda_star"];
  gt.lambda_star.resize(static_cast<int>(ls.size()));
  for (std::size_t i = 0; i < ls.size(); ++i) gt.lambda_star(i) = ls[i].get<double>();
  const auto& d = j["d_star"];
  const int S = static_cast<int>(d.size());
  const int A = S ? static_cast<int>(d[0].size()) : 0;
  gt.d_star.d.resize(S, A);
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(d[s].size()) != A)
      throw ValidationError("ground-truth file: ragged d_star");
    for (int a = 0; a < A; ++a) gt.d_star.d(s, a) = d[s][a].get<double>();
  }
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << ground_truth_to_json(gt);
}

GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ground_truth_from_json(ss.str());
}

}  // namespace cmdp
