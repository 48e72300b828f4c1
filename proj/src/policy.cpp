#include "softlspi/policy.hpp"

#include <cmath>

#include "softlspi/errors.hpp"

namespace softlspi {

namespace {

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& q, const char* what) {
  if (q.size() == 0) throw ContractError(std::string(what) + ": empty action-value vector");
  if (!q.allFinite()) throw ContractError(std::string(what) + ": non-finite action values");
}

}  // namespace

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Greedy:
      return "greedy";
    case OperatorKind::Softmax:
      return "softmax";
    case OperatorKind::EpsilonGreedy:
      return "egreedy";
  }
  return "unknown";
}

OperatorKind parse_operator_kind(std::string_view text) {
  if (text == "greedy") return OperatorKind::Greedy;
  if (text == "softmax") return OperatorKind::Softmax;
  if (text == "egreedy" || text == "epsilon_greedy") return OperatorKind::EpsilonGreedy;
  throw ConfigError("unknown operator '" + std::string(text) + "' (greedy, softmax, egreedy)");
}

void ImprovementConfig::validate() const {
  if (kind == OperatorKind::Softmax && !(std::isfinite(beta) && beta >= 0.0))
    throw ConfigError("softmax beta must be finite and >= 0");
  if (kind == OperatorKind::EpsilonGreedy && !(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("epsilon must lie in [0, 1]");
}

ActionDistribution softmax_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values, double beta) {
  require_finite(q_values, "softmax_policy");
  if (!(std::isfinite(beta) && beta >= 0.0)) throw ContractError("softmax_policy: bad beta");
  const double top = q_values.maxCoeff();
  Eigen::VectorXd p = (beta * (q_values.array() - top)).exp().matrix();
  p /= p.sum();
  return {std::move(p)};
}

ActionDistribution epsilon_greedy_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values,
                                         double epsilon) {
  require_finite(q_values, "epsilon_greedy_policy");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractError("epsilon_greedy_policy: bad epsilon");
  const auto n = static_cast<double>(q_values.size());
  Eigen::VectorXd p = Eigen::VectorXd::Constant(q_values.size(), epsilon / n);
  p[argmax_lowest(q_values)] += 1.0 - epsilon;
  return {std::move(p)};
}

ActionDistribution greedy_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values) {
  require_finite(q_values, "greedy_policy");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(q_values.size());
  p[argmax_lowest(q_values)] = 1.0;
  return {std::move(p)};
}

Eigen::VectorXd normalize_q(const Eigen::Ref<const Eigen::VectorXd>& q_values) {
  require_finite(q_values, "normalize_q");
  const double mean = q_values.mean();
  const Eigen::ArrayXd centered = q_values.array() - mean;
  const double sigma = std::sqrt(centered.square().mean());
  if (sigma < kDegenerateSigma) return Eigen::VectorXd::Zero(q_values.size());
  return (centered / sigma).matrix();
}

ActionDistribution improvement_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values,
                                      const ImprovementConfig& config) {
  config.validate();
  const Eigen::VectorXd q = config.normalize ? normalize_q(q_values) : Eigen::VectorXd(q_values);
  switch (config.kind) {
    case OperatorKind::Greedy:
      return greedy_policy(q);
    case OperatorKind::Softmax:
      return softmax_policy(q, config.beta);
    case OperatorKind::EpsilonGreedy:
      return epsilon_greedy_policy(q, config.epsilon);
  }
  throw ContractError("improvement_policy: unknown operator kind");
}

double apply_operator(const Eigen::Ref<const Eigen::VectorXd>& f_values,
                      const Eigen::Ref<const Eigen::VectorXd>& q_values,
                      const ImprovementConfig& config) {
  if (f_values.size() != q_values.size())
    throw ContractError("apply_operator: f and q have different action counts");
  if (config.kind == OperatorKind::Greedy) {
    const Eigen::VectorXd q = config.normalize ? normalize_q(q_values) : Eigen::VectorXd(q_values);
    return f_values[argmax_lowest(q)];
  }
  return improvement_policy(q_values, config).probs.dot(f_values);
}

double soft_td_error(const Eigen::Ref<const Eigen::VectorXd>& state_feats, int action,
                     double reward, const Eigen::Ref<const Eigen::VectorXd>& next_state_feats,
                     bool terminal, const QWeights& weights, double gamma,
                     const ImprovementConfig& config) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractError("soft_td_error: gamma must lie in [0, 1)");
  const Eigen::VectorXd q = q_from_state_features(weights, state_feats);
  if (action < 0 || action >= q.size()) throw ContractError("soft_td_error: bad action");
  double delta = reward - q[action];
  if (!terminal) {
    const Eigen::VectorXd q_next = q_from_state_features(weights, next_state_feats);
    delta += gamma * apply_operator(q_next, q_next, config);
  }
  return delta;
}

double soft_td_error(const Transition& transition, const FeatureMap& map, const QWeights& weights,
                     double gamma, const ImprovementConfig& config) {
  if (weights.size() != map.dim()) throw ContractError("soft_td_error: dimension mismatch");
  return soft_td_error(map.state_features(transition.pose), index_of(transition.action),
                       transition.reward, map.state_features(transition.next_pose),
                       transition.terminal, weights, gamma, config);
}

}  // namespace softlspi
