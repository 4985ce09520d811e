#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cmdp/errors.hpp"
#include "cmdp/history.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

namespace {

using nlohmann::json;

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << '[';
  for (int r = 0; r < m.rows(); ++r) {
    if (r) os << ',';
    os << '[';
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_decimal(m(r, c));
    }
    os << ']';
  }
  os << ']';
}

const json& key(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ValidationError(std::string("model file: missing key \"") + name + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError("model file: " + where + " is not a number");
  return j.get<double>();
}

Eigen::MatrixXd matrix(const json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ValidationError("model file: " + where + " must have " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ValidationError("model file: " + where + "[" + std::to_string(r) + "] must have " +
                            std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c)
      m(r, c) = number(row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

}  // namespace

std::string model_to_json(const CmdpModel& model) {
  std::ostringstream os;
  const int S = model.num_states;
  const int A = model.num_actions;
  os << "{\n  \"num_states\": " << S << ",\n  \"num_actions\": " << A
     << ",\n  \"gamma\": " << format_decimal(model.gamma)
     << ",\n  \"cost_scale\": " << format_decimal(model.cost_scale) << ",\n  \"rho\": [";
  for (int s = 0; s < model.rho.size(); ++s) os << (s ? "," : "") << format_decimal(model.rho(s));
  os << "],\n  \"transition\": [";
  for (int s = 0; s < S; ++s) {
    os << (s ? ",\n    " : "\n    ");
    write_matrix(os, model.transition.middleRows(s * A, A));
  }
  os << "\n  ],\n  \"objective_cost\": ";
  write_matrix(os, model.objective_cost);
  os << ",\n  \"constraint_costs\": [";
  for (int i = 0; i < model.num_constraints(); ++i) {
    os << (i ? ",\n    " : "\n    ");
    write_matrix(os, model.constraint_costs[i]);
  }
  os << (model.num_constraints() ? "\n  ]" : "]");
  if (!model.thresholds.empty()) {
    os << ",\n  \"thresholds\": [";
    for (std::size_t i = 0; i < model.thresholds.size(); ++i)
      os << (i ? "," : "") << format_decimal(model.thresholds[i]);
    os << ']';
  }
  os << "\n}\n";
  return os.str();
}

CmdpModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("model file: top level must be an object");

  CmdpModel m;
  const auto& ns = key(j, "num_states");
  const auto& na = key(j, "num_actions");
  if (!ns.is_number_integer() || !na.is_number_integer())
    throw ValidationError("model file: num_states and num_actions must be integers");
  m.num_states = ns.get<int>();
  m.num_actions = na.get<int>();
  if (m.num_states <= 0 || m.num_actions <= 0)
    throw ValidationError("model file: num_states and num_actions must be positive");
  const int S = m.num_states;
  const int A = m.num_actions;
  m.gamma = number(key(j, "gamma"), "gamma");
  m.cost_scale = j.contains("cost_scale") ? number(j["cost_scale"], "cost_scale") : 1.0;

  const auto& rho = key(j, "rho");
  if (!rho.is_array() || static_cast<int>(rho.size()) != S)
    throw ValidationError("model file: rho must have " + std::to_string(S) + " entries");
  m.rho.resize(S);
  for (int s = 0; s < S; ++s) m.rho(s) = number(rho[s], "rho[" + std::to_string(s) + "]");

  const auto& tr = key(j, "transition");
  if (!tr.is_array() || static_cast<int>(tr.size()) != S)
    throw ValidationError("model file: transition must have " + std::to_string(S) + " states");
  m.transition.resize(S * A, S);
  for (int s = 0; s < S; ++s)
    m.transition.middleRows(s * A, A) =
        matrix(tr[s], A, S, "transition[" + std::to_string(s) + "]");

  m.objective_cost = matrix(key(j, "objective_cost"), S, A, "objective_cost");
  const auto& cc = key(j, "constraint_costs");
  if (!cc.is_array()) throw ValidationError("model file: constraint_costs must be an array");
  for (std::size_t i = 0; i < cc.size(); ++i)
    m.constraint_costs.push_back(
        matrix(cc[i], S, A, "constraint_costs[" + std::to_string(i) + "]"));
  if (j.contains("thresholds")) {
    for (const auto& t : j["thresholds"]) m.thresholds.push_back(number(t, "thresholds"));
  }
  require_valid(m);
  return m;
}

void write_model(const CmdpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << model_to_json(model);
  if (!out) throw ValidationError("failed writing " + path);
}

CmdpModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace cmdp
