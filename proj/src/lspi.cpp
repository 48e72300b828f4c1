#include "softlspi/lspi.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "softlspi/errors.hpp"
#include "text_util.hpp"

namespace softlspi {

void FeatureBatch::validate() const {
  const Eigen::Index n = states.rows();
  if (n == 0) throw ContractError("feature batch is empty");
  if (next_states.rows() != n || next_states.cols() != states.cols() ||
      static_cast<Eigen::Index>(actions.size()) != n || rewards.size() != n ||
      static_cast<Eigen::Index>(terminal.size()) != n)
    throw ContractError("feature batch has inconsistent shapes");
  if (num_actions < 1) throw ContractError("feature batch needs at least one action");
  for (const int a : actions)
    if (a < 0 || a >= num_actions) throw ContractError("feature batch action out of range");
  if (!states.allFinite() || !next_states.allFinite())
    throw DataError("non-finite state features in batch");
  if (!rewards.allFinite()) throw DataError("non-finite rewards in batch");
}

FeatureBatch featurize(const Batch& batch, const FeatureMap& map) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw ContractError("featurize: empty batch");
  FeatureBatch fb;
  fb.states.resize(n, map.state_dim());
  fb.next_states.resize(n, map.state_dim());
  fb.actions.resize(n);
  fb.rewards.resize(n);
  fb.terminal.resize(n);
  Eigen::VectorXd buf(map.state_dim());
  for (Eigen::Index t = 0; t < n; ++t) {
    const Transition& tr = batch.transitions[t];
    map.state_features(tr.pose, buf);
    fb.states.row(t) = buf.transpose();
    map.state_features(tr.next_pose, buf);
    fb.next_states.row(t) = buf.transpose();
    fb.actions[t] = index_of(tr.action);
    fb.rewards[t] = tr.reward;
    fb.terminal[t] = tr.terminal;
  }
  fb.validate();
  return fb;
}

LstdAssembler::LstdAssembler(FeatureBatch batch) : batch_(std::move(batch)) {
  batch_.validate();
  const Eigen::Index n = batch_.size();
  const Eigen::Index p = batch_.state_dim();
  const int actions = batch_.num_actions;
  const double inv_n = 1.0 / static_cast<double>(n);

  groups_.resize(actions);
  for (Eigen::Index t = 0; t < n; ++t) groups_[batch_.actions[t]].rows.push_back(t);

  gram_ = Eigen::MatrixXd::Zero(batch_.dim(), batch_.dim());
  b_ = Eigen::VectorXd::Zero(batch_.dim());
  for (int a = 0; a < actions; ++a) {
    ActionGroup& g = groups_[a];
    const auto rows = static_cast<Eigen::Index>(g.rows.size());
    g.states.resize(rows, p);
    g.next_states.resize(rows, p);
    Eigen::VectorXd rewards(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::Index t = g.rows[i];
      g.states.row(i) = batch_.states.row(t);
      if (batch_.terminal[t])
        g.next_states.row(i).setZero();
      else
        g.next_states.row(i) = batch_.next_states.row(t);
      rewards[i] = batch_.rewards[t];
    }
    gram_.block(a * p, a * p, p, p).noalias() = inv_n * (g.states.transpose() * g.states);
    b_.segment(a * p, p).noalias() = inv_n * (g.states.transpose() * rewards);
  }
}

LstdSystem LstdAssembler::assemble(const QWeights& policy_weights, double gamma,
                                   const ImprovementConfig& config) const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractError("lstd_assemble: gamma must lie in [0, 1)");
  config.validate();
  const Eigen::Index p = batch_.state_dim();
  const int actions = batch_.num_actions;
  if (policy_weights.size() != batch_.dim())
    throw ContractError("lstd_assemble: policy weights have " +
                        std::to_string(policy_weights.size()) + " entries, expected " +
                        std::to_string(batch_.dim()));
  if (!policy_weights.w.allFinite()) throw DataError("lstd_assemble: non-finite policy weights");

  LstdSystem system{gram_, b_, static_cast<std::size_t>(batch_.size())};
  if (gamma == 0.0) return system;

  const Eigen::Map<const Eigen::MatrixXd> block_weights(policy_weights.w.data(), p, actions);
  const double scale = gamma / static_cast<double>(batch_.size());

  for (int a = 0; a < actions; ++a) {
    const ActionGroup& g = groups_[a];
    const auto rows = static_cast<Eigen::Index>(g.rows.size());
    if (rows == 0) continue;
    const Eigen::MatrixXd q_next = g.next_states * block_weights;  // rows x actions
    // Expected next-state features under the improvement policy, one block per action.
    Eigen::MatrixXd expected(rows, p * actions);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (batch_.terminal[g.rows[i]]) {
        expected.row(i).setZero();
        continue;
      }
      const ActionDistribution pi = improvement_policy(q_next.row(i).transpose(), config);
      for (int b = 0; b < actions; ++b)
        expected.block(i, b * p, 1, p) = pi.probs[b] * g.next_states.row(i);
    }
    system.A.middleRows(a * p, p).noalias() -= scale * (g.states.transpose() * expected);
  }
  return system;
}

LstdSystem lstd_assemble(const FeatureBatch& batch, const QWeights& policy_weights, double gamma,
                         const ImprovementConfig& config) {
  return LstdAssembler(batch).assemble(policy_weights, gamma, config);
}

LstdSystem lstd_assemble(const Batch& batch, const FeatureMap& map, const QWeights& policy_weights,
                         double gamma, const ImprovementConfig& config) {
  return lstd_assemble(featurize(batch, map), policy_weights, gamma, config);
}

LstdSolution lstd_solve_detailed(const LstdSystem& system, double ridge) {
  const Eigen::Index m = system.A.rows();
  if (system.A.cols() != m || system.b.size() != m) throw ContractError("lstd_solve: bad shapes");
  if (!(ridge >= 0.0)) throw ContractError("lstd_solve: ridge must be >= 0");
  if (!system.A.allFinite() || !system.b.allFinite()) throw DataError("lstd_solve: non-finite system");
  Eigen::MatrixXd regularized = system.A;
  regularized.diagonal().array() += ridge;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(regularized);
  const double rcond = lu.rcond();
  if (!(rcond >= std::numeric_limits<double>::epsilon())) {
    throw SolverError("LSTD system is singular (condition estimate " +
                      std::to_string(rcond > 0.0 ? 1.0 / rcond : INFINITY) +
                      ", ridge " + std::to_string(ridge) + ")");
  }
  LstdSolution solution{{lu.solve(system.b)}, 1.0 / rcond};
  if (!solution.weights.w.allFinite())
    throw SolverError("LSTD solve produced non-finite weights (condition estimate " +
                      std::to_string(solution.condition_estimate) + ")");
  return solution;
}

QWeights lstd_solve(const LstdSystem& system, double ridge) {
  return lstd_solve_detailed(system, ridge).weights;
}

namespace {

std::string rounded_key(const Eigen::VectorXd& w) {
  std::string key;
  key.reserve(static_cast<std::size_t>(w.size()) * 20);
  char buf[40];
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    // 12 significant digits; +0.0 folds negative zero.
    std::snprintf(buf, sizeof(buf), "%.11e;", w[i] + 0.0);
    key += buf;
  }
  return key;
}

}  // namespace

LspiResult lspi_train(const LstdAssembler& assembler, double gamma, const ImprovementConfig& config,
                      const LspiOptions& options) {
  if (options.max_iters < 1) throw ContractError("lspi_train: max_iters must be >= 1");
  if (!(options.tol > 0.0)) throw ContractError("lspi_train: tol must be > 0");
  config.validate();

  LspiResult result;
  result.w.w = Eigen::VectorXd::Zero(assembler.batch().dim());
  std::vector<Eigen::VectorXd> history{result.w.w};
  std::unordered_map<std::string, std::size_t> seen{{rounded_key(result.w.w), 0}};

  for (int k = 1; k <= options.max_iters; ++k) {
    const LstdSystem system = assembler.assemble(result.w, gamma, config);
    LstdSolution next = lstd_solve_detailed(system, options.ridge);
    const double delta = (next.weights.w - result.w.w).lpNorm<Eigen::Infinity>();
    result.weight_deltas.push_back(delta);
    result.condition_estimates.push_back(next.condition_estimate);
    result.w = std::move(next.weights);
    result.iterations = k;
    if (delta <= options.tol) {
      result.converged = true;
      break;
    }
    const auto [it, inserted] = seen.emplace(rounded_key(result.w.w), history.size());
    history.push_back(result.w.w);
    if (!inserted) {
      result.cycle_detected = true;
      if (options.cycle_evaluator) {
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = it->second; i + 1 < history.size(); ++i) {
          const QWeights member{history[i]};
          const double score = options.cycle_evaluator(member);
          if (score > best_score) {
            best_score = score;
            result.w = member;
          }
        }
      }
      break;
    }
  }
  return result;
}

LspiResult lspi_train(const Batch& batch, const FeatureMap& map, double gamma,
                      const ImprovementConfig& config, const LspiOptions& options) {
  return lspi_train(LstdAssembler(featurize(batch, map)), gamma, config, options);
}

void write_run_log(const LspiResult& result, std::ostream& out) {
  out << "iteration,delta,condition_estimate\n";
  for (std::size_t i = 0; i < result.weight_deltas.size(); ++i) {
    out << (i + 1) << ',' << detail::format_double(result.weight_deltas[i]) << ','
        << detail::format_double(result.condition_estimates[i]) << '\n';
  }
}

void write_run_log(const LspiResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_run_log(result, out);
}

}  // namespace softlspi
