#pragma once

// Least-squares policy iteration with pluggable (greedy or stochastic) policy
// improvement. Policy evaluation is LSTD on a fixed batch:
//
//   A = 1/n sum_t phi(x_t, a_t) (phi(x_t, a_t) - gamma Gamma[phi | q](x_{t+1}))^T
//   b = 1/n sum_t phi(x_t, a_t) r_t
//
// where Gamma[phi | q] averages the next-state features under the improvement
// policy of the previous iterate's Q-function. Terminal transitions drop the
// bootstrap term.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "softlspi/features.hpp"
#include "softlspi/navsim.hpp"
#include "softlspi/policy.hpp"

namespace softlspi {

/// Batch with state features evaluated once: row t of states/next_states holds
/// the p state features of x_t / x_{t+1}. The state-action features are the
/// Kronecker composition with the action indicator.
struct FeatureBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd next_states;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  std::vector<bool> terminal;
  int num_actions = kNumActions;

  Eigen::Index size() const { return states.rows(); }
  Eigen::Index state_dim() const { return states.cols(); }
  Eigen::Index dim() const { return state_dim() * num_actions; }

  /// Throws ContractError on inconsistent shapes, DataError on non-finite entries.
  void validate() const;
};

FeatureBatch featurize(const Batch& batch, const FeatureMap& map);

struct LstdSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::size_t n = 0;
};

/// Precomputes the policy-independent parts of the LSTD system (per-action
/// Gram blocks and b) so repeated assembly only pays for the bootstrap term.
class LstdAssembler {
 public:
  explicit LstdAssembler(FeatureBatch batch);

  const FeatureBatch& batch() const { return batch_; }
  LstdSystem assemble(const QWeights& policy_weights, double gamma,
                      const ImprovementConfig& config) const;

 private:
  struct ActionGroup {
    Eigen::MatrixXd states;       // rows of the batch that took this action
    Eigen::MatrixXd next_states;  // terminal rows zeroed
    std::vector<Eigen::Index> rows;
  };

  FeatureBatch batch_;
  std::vector<ActionGroup> groups_;
  Eigen::MatrixXd gram_;  // policy-independent 1/n sum phi phi^T
  Eigen::VectorXd b_;
};

LstdSystem lstd_assemble(const FeatureBatch& batch, const QWeights& policy_weights, double gamma,
                         const ImprovementConfig& config);
LstdSystem lstd_assemble(const Batch& batch, const FeatureMap& map, const QWeights& policy_weights,
                         double gamma, const ImprovementConfig& config);

struct LstdSolution {
  QWeights weights;
  double condition_estimate = 0.0;  ///< 1-norm condition estimate of A + ridge I
};

/// Solves (A + ridge I) w = b by LU with partial pivoting. Throws SolverError
/// when the reciprocal condition estimate falls below machine epsilon.
LstdSolution lstd_solve_detailed(const LstdSystem& system, double ridge);
QWeights lstd_solve(const LstdSystem& system, double ridge);

struct LspiOptions {
  int max_iters = 50;
  double tol = 1e-6;
  double ridge = 1e-6;
  /// When set and a cycle is detected, the best-scoring cycle member is returned
  /// instead of the last iterate.
  std::function<double(const QWeights&)> cycle_evaluator;
};

struct LspiResult {
  QWeights w;
  int iterations = 0;
  bool converged = false;
  bool cycle_detected = false;
  std::vector<double> weight_deltas;        ///< max-norm change per iteration
  std::vector<double> condition_estimates;  ///< per iteration
};

/// Starts from w = 0 and alternates improvement and LSTD evaluation until the
/// max-norm weight change is <= tol, max_iters is reached, or an iterate repeats
/// an earlier one (weights rounded to 12 significant digits).
LspiResult lspi_train(const LstdAssembler& assembler, double gamma, const ImprovementConfig& config,
                      const LspiOptions& options = {});
LspiResult lspi_train(const Batch& batch, const FeatureMap& map, double gamma,
                      const ImprovementConfig& config, const LspiOptions& options = {});

/// CSV 'iteration,delta,condition_estimate'.
void write_run_log(const LspiResult& result, std::ostream& out);
void write_run_log(const LspiResult& result, const std::filesystem::path& path);

}  // namespace softlspi
