#include "cmdp/policy.hpp"

#include <cstring>

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

Eigen::MatrixXd normalise_rows(Eigen::MatrixXd logits) {
  for (int s = 0; s < logits.rows(); ++s) {
    const double mx = logits.row(s).maxCoeff();
    if (!std::isfinite(mx)) throw ValidationError("policy logits must be finite");
    const double lse = mx + std::log((logits.row(s).array() - mx).exp().sum());
    logits.row(s).array() -= lse;
  }
  return logits;
}

}  // namespace

TabularPolicy TabularPolicy::from_logits(const Eigen::MatrixXd& logits) {
  if (logits.rows() == 0 || logits.cols() == 0) throw ValidationError("empty policy");
  return TabularPolicy(normalise_rows(logits));
}

TabularPolicy TabularPolicy::from_probabilities(const Eigen::MatrixXd& probs) {
  if (probs.rows() == 0 || probs.cols() == 0) throw ValidationError("empty policy");
  if (!(probs.array() > 0.0).all())
    throw ValidationError("policy probabilities must be strictly positive");
  return TabularPolicy(normalise_rows(probs.array().log().matrix()));
}

std::uint64_t TabularPolicy::fingerprint() const {
  // FNV-1a over the raw doubles
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(log_probs_.rows()));
  feed(static_cast<std::uint64_t>(log_probs_.cols()));
  for (Eigen::Index i = 0; i < log_probs_.size(); ++i) {
    std::uint64_t bits;
    const double v = log_probs_.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    feed(bits);
  }
  return h;
}

TabularPolicy uniform_policy(int num_states, int num_actions) {
  return TabularPolicy::from_logits(Eigen::MatrixXd::Zero(num_states, num_actions));
}

Eigen::VectorXd statewise_kl(const TabularPolicy& pi, const TabularPolicy& ref) {
  const Eigen::MatrixXd diff = pi.log_probs() - ref.log_probs();
  const Eigen::MatrixXd p = pi.probabilities();
  Eigen::VectorXd kl = (p.array() * diff.array()).rowwise().sum();
  return kl.cwiseMax(0.0);
}

double expected_kl(const Eigen::VectorXd& state_weights, const TabularPolicy& pi,
                   const TabularPolicy& ref) {
  if (state_weights.size() != pi.num_states())
    throw ValidationError("expected_kl: weight vector has the wrong length");
  return state_weights.dot(statewise_kl(pi, ref));
}

TabularPolicy npg_step(const TabularPolicy& policy, const Eigen::MatrixXd& q, double eta) {
  return TabularPolicy::from_logits(policy.log_probs() - eta * q);
}

TabularPolicy npg_entropy_step(const TabularPolicy& policy, const Eigen::MatrixXd& q_reg,
                               double alpha, double eta, double gamma) {
  if (!(alpha > 0.0)) throw ParameterError("npg_entropy_step: alpha must be positive");
  const double eta_max = (1.0 - gamma) / alpha;
  if (!(eta > 0.0) || eta > eta_max * (1.0 + 1e-12))
    throw ParameterError("npg_entropy_step: eta must lie in (0, (1 - gamma) / alpha]");
  double keep = 1.0 - eta * alpha / (1.0 - gamma);
  if (keep < 0.0) keep = 0.0;
  Eigen::MatrixXd logits = -(eta / (1.0 - gamma)) * q_reg;
  if (keep > 0.0) logits += keep * policy.log_probs();
  return TabularPolicy::from_logits(logits);
}

double max_log_gap(const TabularPolicy& a, const TabularPolicy& b) {
  return (a.log_probs() - b.log_probs()).cwiseAbs().maxCoeff();
}

}  // namespace cmdp
