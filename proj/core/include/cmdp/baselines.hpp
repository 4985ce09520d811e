#pragma once

#include <cstdint>
#include <optional>

#include "cmdp/history.hpp"
#include "cmdp/model.hpp"
#include "cmdp/pmd_pd.hpp"

namespace cmdp {

enum class BaselineAlgorithm { npg_pd, crpo };

struct BaselineConfig {
  BaselineAlgorithm algorithm = BaselineAlgorithm::npg_pd;
  double eta = 1.0;
  double eta_prime = 1.0;
  /// Slater margin used by the NPG-PD projection cap 2 / ((1 - gamma) xi).
  std::optional<double> xi;
  /// CRPO switches to a constraint step when some V_{c_i} exceeds this.
  double tolerance = 0.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  bool keep_policies = false;
};

/// NPG primal steps on c_0 + Sum lambda_i c_i alternating with the projected
/// dual update lambda <- clip(lambda + eta' V_{c_i}^{pi_{t+1}}, 0, 2/((1-gamma) xi)).
RunHistory run_npg_pd(const CmdpModel& model, const BaselineConfig& config);

/// CRPO-style primal method: an NPG step on the most violated constraint when
/// max_i V_{c_i} > tolerance (lowest index on ties), else on the objective.
RunHistory run_crpo(const CmdpModel& model, const BaselineConfig& config);

/// Dual cap of NPG-PD.
double npg_pd_dual_cap(double gamma, double xi);

}  // namespace cmdp
