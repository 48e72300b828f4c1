#pragma once

// Experiment harness: greedy evaluation of learned Q-functions, gamma x operator
// x seed sweeps, and CSV/SVG reports.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softlspi/features.hpp"
#include "softlspi/lspi.hpp"
#include "softlspi/navsim.hpp"
#include "softlspi/policy.hpp"
#include "softlspi/sfa.hpp"

namespace softlspi {

enum class Representation { Fourier, Sfa };

std::string to_string(Representation r);
Representation parse_representation(std::string_view text);

struct SolverParams {
  double ridge = 1e-6;
  double tol = 1e-6;
  int max_iters = 50;
};

struct ExperimentConfig {
  std::string world = "U";
  Representation representation = Representation::Fourier;
  /// Normalized softmax over beta_grid, plus greedy cells.
  ImprovementConfig improvement = ImprovementConfig::softmax(1.0, true);
  /// Adds greedy cells next to the configured operator (softmax / egreedy sweeps).
  bool include_greedy = true;
  std::vector<double> gamma_grid{0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99};
  std::vector<double> beta_grid{1, 2, 5, 10, 20, 50};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t batch_size = 20000;
  int eval_starts = 200;
  int horizon = 100;
  SolverParams solver;
  int fourier_terms = 6;
  SfaParams sfa;
  /// Wall time varies run to run; it is only written when requested so that
  /// repeated sweeps produce identical CSV files.
  bool record_wall_time = false;

  /// Throws ConfigError on empty grids, gamma outside [0, 1) and similar.
  void validate() const;
};

/// Batch 20000, 5 seeds, 6x6x5 Fourier basis.
ExperimentConfig desk_preset();
/// Batch 50000, 10 seeds, 10x10x5 Fourier basis.
ExperimentConfig paper_preset();

/// Parses a JSON document mirroring ExperimentConfig; unknown keys are a ConfigError.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& config);

struct EvalOutcome {
  int successes = 0;
  int starts = 0;

  double success_fraction() const {
    return starts == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(starts);
  }
};

using Controller = std::function<Action(const Pose&)>;

/// Runs the controller from `starts` sampled start poses. A trajectory succeeds
/// iff it enters the goal within `horizon` actions without crashing; a crash
/// aborts the trajectory.
EvalOutcome evaluate_controller(const WorldSpec& world, const Controller& controller, int starts,
                                int horizon, Rng& rng);

/// Greedy policy of the Q-function (lowest-index tie-break).
EvalOutcome evaluate_greedy(const WorldSpec& world, const FeatureMap& map, const QWeights& weights,
                            int starts, int horizon, Rng& rng);

double evaluate_policy(const WorldSpec& world, const FeatureMap& map, const QWeights& weights,
                       int starts, int horizon, Rng& rng);

struct SweepCell {
  std::string world;
  Representation representation = Representation::Fourier;
  OperatorKind op = OperatorKind::Greedy;
  bool normalize = false;
  double gamma = 0.0;
  std::optional<double> beta;     ///< softmax only
  std::optional<double> epsilon;  ///< epsilon-greedy only
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  std::optional<double> success_fraction;  ///< absent when the cell failed
  int iterations = 0;
  bool converged = false;
  std::optional<double> wall_time_s;
  std::string error;

  bool operator==(const SweepCell&) const = default;
};

using SweepTable = std::vector<SweepCell>;

/// Operator settings run at every gamma and seed: one per beta for softmax,
/// preceded by greedy when include_greedy is set.
std::vector<ImprovementConfig> sweep_operators(const ExperimentConfig& config);

/// Seed of the RNG stream used for a purpose within a cell.
std::uint64_t batch_seed(std::uint64_t root_seed);
std::uint64_t eval_seed(std::uint64_t root_seed, double gamma, const ImprovementConfig& improvement);

using ProgressCallback = std::function<void(const SweepCell&)>;

/// Runs every (seed, gamma, operator) cell; solver failures are recorded in the
/// cell. The table is sorted by (gamma, beta, operator, epsilon, seed).
SweepTable run_sweep(const ExperimentConfig& config, const ProgressCallback& progress = {});

void sort_table(SweepTable& table);

/// Columns: world, representation, operator, normalize, gamma, beta, epsilon,
/// seed, batch_size, success_fraction, iterations, converged, wall_time_s, error.
void write_csv(const SweepTable& table, std::ostream& out);
void write_csv(const SweepTable& table, const std::filesystem::path& path);
SweepTable read_csv(std::istream& in);
SweepTable read_csv(const std::filesystem::path& path);

/// Mean and population standard deviation across seeds of one series at one gamma.
struct SummaryRow {
  Representation representation = Representation::Fourier;
  OperatorKind op = OperatorKind::Greedy;
  bool normalize = false;
  std::optional<double> beta;
  std::optional<double> epsilon;
  double gamma = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;     ///< seeds with a success fraction
  int failures = 0;  ///< seeds whose cell errored
};

std::vector<SummaryRow> summarize(const SweepTable& table);
void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& summary, const std::filesystem::path& path);

/// Legend label of a series, built from its CSV fields.
std::string series_label(const SummaryRow& row);

/// SVG line chart: x = gamma, y = mean success fraction in [0, 1] with
/// +-std error bars, one series per (operator, beta, epsilon, normalize,
/// representation). Throws ConfigError on an empty table.
std::string render_chart(const SweepTable& table, const std::string& title = "");
void render_chart(const SweepTable& table, const std::filesystem::path& path,
                  const std::string& title = "");

}  // namespace softlspi
