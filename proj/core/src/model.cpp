#include "cmdp/model.hpp"

#include <cmath>
#include <sstream>

#include "cmdp/errors.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_cost(const Eigen::MatrixXd& cost, const std::string& name, double c_max,
                std::vector<Violation>& out) {
  for (int s = 0; s < cost.rows(); ++s)
    for (int a = 0; a < cost.cols(); ++a) {
      const double c = cost(s, a);
      if (!std::isfinite(c))
        out.push_back({name + " entry is not finite", s, a, c});
      else if (std::abs(c) > c_max * (1.0 + 1e-12))
        out.push_back({name + " exceeds cost_scale", s, a, std::abs(c) - c_max});
    }
}

Eigen::MatrixXd dirichlet_rows(int rows, int cols, Engine& engine) {
  Eigen::MatrixXd p(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double total = 0.0;
    for (int c = 0; c < cols; ++c) {
      // Exp(1) draws; 1 - U avoids log(0)
      const double e = -std::log(1.0 - uniform01(engine));
      p(r, c) = e;
      total += e;
    }
    p.row(r) /= total;
  }
  return p;
}

}  // namespace

std::string Violation::describe() const {
  std::ostringstream os;
  os << what;
  if (state >= 0) {
    os << " at (s=" << state;
    if (action >= 0) os << ", a=" << action;
    os << ")";
  }
  os << ", magnitude " << magnitude;
  return os.str();
}

std::vector<Violation> validate(const CmdpModel& model) {
  std::vector<Violation> out;
  const int S = model.num_states;
  const int A = model.num_actions;
  if (S <= 0) out.push_back({"num_states must be positive", -1, -1, double(S)});
  if (A <= 0) out.push_back({"num_actions must be positive", -1, -1, double(A)});
  if (!(model.gamma >= 0.0 && model.gamma < 1.0))
    out.push_back({"gamma must lie in [0, 1)", -1, -1, model.gamma});
  if (!(model.cost_scale > 0.0) || !std::isfinite(model.cost_scale))
    out.push_back({"cost_scale must be positive", -1, -1, model.cost_scale});
  if (!out.empty() && (S <= 0 || A <= 0)) return out;

  if (model.transition.rows() != S * A || model.transition.cols() != S) {
    out.push_back({"transition has shape " + std::to_string(model.transition.rows()) + "x" +
                       std::to_string(model.transition.cols()) + ", expected " +
                       std::to_string(S * A) + "x" + std::to_string(S),
                   -1, -1, 0.0});
  } else {
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = model.transition.row(model.row(s, a));
        double sum = 0.0;
        double most_negative = 0.0;
        bool finite = true;
        for (int j = 0; j < S; ++j) {
          if (!std::isfinite(row(j))) finite = false;
          sum += row(j);
          most_negative = std::min(most_negative, row(j));
        }
        if (!finite) {
          out.push_back({"transition row is not finite", s, a, 0.0});
          continue;
        }
        if (most_negative < 0.0)
          out.push_back({"transition row has a negative entry", s, a, -most_negative});
        if (std::abs(sum - 1.0) > kStochasticTol)
          out.push_back({"transition row does not sum to 1", s, a, sum - 1.0});
      }
  }

  if (model.rho.size() != S) {
    out.push_back({"rho has length " + std::to_string(model.rho.size()) + ", expected " +
                       std::to_string(S),
                   -1, -1, 0.0});
  } else {
    for (int s = 0; s < S; ++s)
      if (!(model.rho(s) >= 0.0)) out.push_back({"rho has a negative entry", s, -1, model.rho(s)});
    const double sum = model.rho.sum();
    if (std::abs(sum - 1.0) > kStochasticTol)
      out.push_back({"rho does not sum to 1", -1, -1, sum - 1.0});
  }

  auto check_shape = [&](const Eigen::MatrixXd& c, const std::string& name) {
    if (c.rows() != S || c.cols() != A) {
      out.push_back({name + " has the wrong shape", -1, -1, 0.0});
      return false;
    }
    return true;
  };
  if (check_shape(model.objective_cost, "objective_cost"))
    check_cost(model.objective_cost, "objective_cost", model.cost_scale, out);
  for (int i = 0; i < model.num_constraints(); ++i) {
    const std::string name = "constraint_costs[" + std::to_string(i) + "]";
    if (check_shape(model.constraint_costs[i], name))
      check_cost(model.constraint_costs[i], name, model.cost_scale, out);
  }
  if (!model.thresholds.empty() && static_cast<int>(model.thresholds.size()) != model.num_constraints())
    out.push_back({"thresholds must have one entry per constraint", -1, -1,
                   double(model.thresholds.size())});
  return out;
}

void require_valid(const CmdpModel& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += "\n  " + v.describe();
  throw ValidationError(msg);
}

CmdpModel generate_random(const RandomCmdpSpec& spec) {
  if (spec.num_states <= 0 || spec.num_actions <= 0 || spec.num_constraints < 0)
    throw ValidationError("random spec sizes must be positive");
  if (!(spec.gamma >= 0.0 && spec.gamma < 1.0))
    throw ValidationError("random spec gamma must lie in [0, 1)");
  if (!(spec.cost_low <= spec.cost_high))
    throw ValidationError("random spec cost bounds are reversed");

  const int S = spec.num_states;
  const int A = spec.num_actions;
  CmdpModel m;
  m.num_states = S;
  m.num_actions = A;
  m.gamma = spec.gamma;
  m.cost_scale = std::max({1.0, std::abs(spec.cost_low), std::abs(spec.cost_high)});

  Engine transitions(derive_seed(spec.seed, {1}));
  m.transition = dirichlet_rows(S * A, S, transitions);

  auto draw = [&](std::uint64_t stream) {
    Engine e(derive_seed(spec.seed, {2, stream}));
    Eigen::MatrixXd c(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        c(s, a) = spec.cost_low + (spec.cost_high - spec.cost_low) * uniform01(e);
    return c;
  };
  m.objective_cost = draw(0);
  for (int i = 0; i < spec.num_constraints; ++i) m.constraint_costs.push_back(draw(i + 1));
  m.rho = Eigen::VectorXd::Constant(S, 1.0 / S);
  return m;
}

CmdpModel from_max_form(const MaxFormSpec& spec, double gamma, const Eigen::MatrixXd& transition,
                        const Eigen::VectorXd& rho) {
  if (spec.utilities.size() != spec.thresholds.size())
    throw ValidationError("max-form spec needs one threshold per utility");
  auto in_unit = [](const Eigen::MatrixXd& x, const std::string& name) {
    for (int s = 0; s < x.rows(); ++s)
      for (int a = 0; a < x.cols(); ++a)
        if (!(x(s, a) >= 0.0 && x(s, a) <= 1.0))
          throw ValidationError(name + " entry outside [0, 1] at (s=" + std::to_string(s) +
                                ", a=" + std::to_string(a) + ")");
  };
  in_unit(spec.reward, "reward");
  for (std::size_t i = 0; i < spec.utilities.size(); ++i)
    in_unit(spec.utilities[i], "utility " + std::to_string(i));

  CmdpModel m;
  m.num_states = static_cast<int>(spec.reward.rows());
  m.num_actions = static_cast<int>(spec.reward.cols());
  m.gamma = gamma;
  m.transition = transition;
  m.rho = rho;
  m.objective_cost = -spec.reward;
  double c_max = 1.0;
  for (std::size_t i = 0; i < spec.utilities.size(); ++i) {
    const double shift = (1.0 - gamma) * spec.thresholds[i];
    if (!std::isfinite(shift))
      throw ValidationError("threshold " + std::to_string(i) + " gives non-finite costs");
    Eigen::MatrixXd c = (-spec.utilities[i]).array() + shift;
    c_max = std::max(c_max, c.cwiseAbs().maxCoeff());
    m.constraint_costs.push_back(std::move(c));
  }
  m.cost_scale = c_max;
  m.thresholds = spec.thresholds;
  require_valid(m);
  return m;
}

CmdpModel generate_random_max_form(const RandomCmdpSpec& spec, double threshold) {
  RandomCmdpSpec unit = spec;
  unit.cost_low = 0.0;
  unit.cost_high = 1.0;
  CmdpModel base = generate_random(unit);
  MaxFormSpec mf;
  mf.reward = base.objective_cost;
  mf.utilities = base.constraint_costs;
  mf.thresholds.assign(base.constraint_costs.size(), threshold);
  return from_max_form(mf, spec.gamma, base.transition, base.rho);
}

CmdpModel shift_constraints(const CmdpModel& model, double shift) {
  CmdpModel out = model;
  double c_max = out.cost_scale;
  for (auto& c : out.constraint_costs) {
    c.array() += shift;
    c_max = std::max(c_max, c.cwiseAbs().maxCoeff());
  }
  out.cost_scale = c_max;
  return out;
}

double max_abs_cost(const CmdpModel& model) {
  double m = model.objective_cost.size() ? model.objective_cost.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& c : model.constraint_costs) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace cmdp
