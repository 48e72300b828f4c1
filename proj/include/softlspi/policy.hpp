#pragma once

// Policies over per-state action-value vectors and the policy-improvement
// operators used by LSPI. Greedy improvement evaluates f at the argmax of q;
// stochastic improvement takes the expectation of f under a softmax or
// epsilon-greedy distribution derived from (optionally normalized) q.

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "softlspi/features.hpp"
#include "softlspi/navsim.hpp"

namespace softlspi {

enum class OperatorKind { Greedy, Softmax, EpsilonGreedy };

std::string to_string(OperatorKind kind);
/// Accepts "greedy", "softmax", "egreedy" / "epsilon_greedy".
OperatorKind parse_operator_kind(std::string_view text);

struct ImprovementConfig {
  OperatorKind kind = OperatorKind::Greedy;
  double beta = 1.0;     ///< inverse stochasticity (softmax)
  double epsilon = 0.0;  ///< exploration mass (epsilon-greedy)
  bool normalize = false;

  /// Throws ConfigError on a negative or non-finite beta, or epsilon outside [0, 1].
  void validate() const;

  static ImprovementConfig greedy() { return {}; }
  static ImprovementConfig softmax(double beta, bool normalize = false) {
    return {OperatorKind::Softmax, beta, 0.0, normalize};
  }
  static ImprovementConfig epsilon_greedy(double epsilon, bool normalize = false) {
    return {OperatorKind::EpsilonGreedy, 1.0, epsilon, normalize};
  }
};

struct ActionDistribution {
  Eigen::VectorXd probs;
};

/// exp(beta q_a) / sum exp(beta q_a'), evaluated after subtracting max q.
ActionDistribution softmax_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values, double beta);

/// epsilon/|A| everywhere plus 1-epsilon on the lowest-index argmax.
ActionDistribution epsilon_greedy_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values,
                                         double epsilon);

ActionDistribution greedy_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values);

/// (q - mean) / std with the population std over actions; the zero vector when
/// std < 1e-12.
Eigen::VectorXd normalize_q(const Eigen::Ref<const Eigen::VectorXd>& q_values);

inline constexpr double kDegenerateSigma = 1e-12;

ActionDistribution improvement_policy(const Eigen::Ref<const Eigen::VectorXd>& q_values,
                                      const ImprovementConfig& config);

/// Expectation of f under improvement_policy(q, config).
double apply_operator(const Eigen::Ref<const Eigen::VectorXd>& f_values,
                      const Eigen::Ref<const Eigen::VectorXd>& q_values,
                      const ImprovementConfig& config);

/// r + gamma * Gamma[q|q](x') - q(x, a); the bootstrap term is dropped for
/// terminal transitions.
double soft_td_error(const Transition& transition, const FeatureMap& map, const QWeights& weights,
                     double gamma, const ImprovementConfig& config);

/// Same residual from precomputed state features.
double soft_td_error(const Eigen::Ref<const Eigen::VectorXd>& state_feats, int action,
                     double reward, const Eigen::Ref<const Eigen::VectorXd>& next_state_feats,
                     bool terminal, const QWeights& weights, double gamma,
                     const ImprovementConfig& config);

}  // namespace softlspi
