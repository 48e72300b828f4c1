// Command-line front end: collect batches, fit SFA models, train and evaluate
// single LSPI runs, and run gamma x operator x seed sweeps.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "softlspi/bench.hpp"
#include "softlspi/errors.hpp"
#include "softlspi/features.hpp"
#include "softlspi/lspi.hpp"
#include "softlspi/navsim.hpp"
#include "softlspi/sfa.hpp"

namespace fs = std::filesystem;
using namespace softlspi;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

// Flags shared by several subcommands; unset values leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> world;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<std::string> op;
  bool normalize = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::string out = ".";
};

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--world", o.world, "world layout")
      ->transform(CLI::IsMember({"u", "s", "U", "S"}));
  cmd->add_option("--gamma", o.gamma, "discount factor");
  cmd->add_option("--beta", o.beta, "softmax inverse stochasticity");
  cmd->add_option("--epsilon", o.epsilon, "epsilon-greedy exploration mass");
  cmd->add_option("--operator", o.op, "policy improvement operator")
      ->check(CLI::IsMember({"greedy", "softmax", "egreedy"}));
  cmd->add_flag("--normalize", o.normalize, "normalize Q-values per state before the softmax");
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--batch-size", o.batch_size, "training transitions");
  cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig config = o.config_path.empty() ? desk_preset() : load_experiment_config(o.config_path);
  if (o.world) config.world = *o.world;
  if (o.op) config.improvement.kind = parse_operator_kind(*o.op);
  if (o.beta) {
    config.improvement.beta = *o.beta;
    config.beta_grid = {*o.beta};
  }
  if (o.epsilon) config.improvement.epsilon = *o.epsilon;
  if (o.normalize) config.improvement.normalize = true;
  if (o.gamma) config.gamma_grid = {*o.gamma};
  if (o.seed) config.seeds = {*o.seed};
  if (o.batch_size) config.batch_size = *o.batch_size;
  config.world = make_world(config.world).name();
  config.validate();
  config.improvement.validate();
  return config;
}

fs::path prepare_out(const std::string& dir) {
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return out;
}

int parse_fourier_terms(const std::string& map_id) {
  // fourier-TxTx5
  const std::string prefix = "fourier-";
  if (map_id.rfind(prefix, 0) != 0) return 0;
  int terms = 0;
  const char* begin = map_id.data() + prefix.size();
  const auto [ptr, ec] = std::from_chars(begin, map_id.data() + map_id.size(), terms);
  if (ec != std::errc() || terms < 1) throw DataError("bad feature map id '" + map_id + "'");
  return terms;
}

std::unique_ptr<FeatureMap> map_for(const std::string& map_id, const std::string& sfa_model_path) {
  if (const int terms = parse_fourier_terms(map_id); terms > 0) return std::make_unique<FourierBasis>(terms);
  if (map_id.rfind("sfa-", 0) == 0) {
    if (sfa_model_path.empty()) throw ConfigError("weights use SFA features; pass --sfa-model");
    auto model = std::make_shared<const SfaModel>(read_sfa_model(fs::path(sfa_model_path)));
    auto map = std::make_unique<SfaFeatureMap>(model);
    if (map->id() != map_id)
      throw DataError("SFA model '" + map->id() + "' does not match weights map '" + map_id + "'");
    return map;
  }
  throw DataError("unknown feature map id '" + map_id + "'");
}

int run_collect(const Overrides& o) {
  const ExperimentConfig config = resolve(o);
  const WorldSpec world = make_world(config.world);
  const std::uint64_t seed = config.seeds.front();
  const Batch batch = collect_random_walk(world, config.batch_size, seed);
  const fs::path path = prepare_out(o.out) / "batch.csv";
  write_batch(batch, path);
  std::cout << path.string() << '\n';
  return 0;
}

int run_sfa_fit(const Overrides& o, const std::string& batch_path) {
  const ExperimentConfig config = resolve(o);
  const Batch batch = read_batch(fs::path(batch_path));
  const SfaModel model = fit_sfa(batch, config.sfa);
  const fs::path path = prepare_out(o.out) / "sfa_model.json";
  write_sfa_model(model, path);
  std::cout << path.string() << " dictionary=" << model.dictionary.size()
            << " features=" << model.feature_count() << '\n';
  return 0;
}

int run_train(const Overrides& o, const std::string& batch_path, const std::string& representation,
              const std::string& sfa_model_path) {
  ExperimentConfig config = resolve(o);
  if (!representation.empty()) config.representation = parse_representation(representation);
  if (!o.gamma && config.gamma_grid.size() != 1)
    throw ConfigError("train needs a single discount factor (--gamma)");
  const double gamma = config.gamma_grid.front();
  const Batch batch = read_batch(fs::path(batch_path));

  std::unique_ptr<FeatureMap> map;
  if (config.representation == Representation::Fourier) {
    map = std::make_unique<FourierBasis>(config.fourier_terms);
  } else {
    auto model = std::make_shared<const SfaModel>(
        sfa_model_path.empty() ? fit_sfa(batch, config.sfa) : read_sfa_model(fs::path(sfa_model_path)));
    map = std::make_unique<SfaFeatureMap>(model);
  }

  LspiOptions options;
  options.max_iters = config.solver.max_iters;
  options.tol = config.solver.tol;
  options.ridge = config.solver.ridge;
  const LspiResult result = lspi_train(batch, *map, gamma, config.improvement, options);

  const fs::path out = prepare_out(o.out);
  write_weights(result.w, *map, out / "weights.txt");
  write_run_log(result, out / "run_log.csv");
  std::cout << (out / "weights.txt").string() << " iterations=" << result.iterations
            << " converged=" << (result.converged ? "true" : "false") << '\n';
  return 0;
}

int run_eval(const Overrides& o, const std::string& weights_path, const std::string& sfa_model_path,
             std::optional<int> starts, std::optional<int> horizon) {
  const ExperimentConfig config = resolve(o);
  const WeightsFile file = read_weights(fs::path(weights_path));
  const std::unique_ptr<FeatureMap> map = map_for(file.map_id, sfa_model_path);
  if (map->dim() != file.weights.size() || map->state_dim() != file.state_dim)
    throw DataError("weights dimension does not match feature map '" + file.map_id + "'");
  const WorldSpec world = make_world(config.world);
  Rng rng(derive_seed(config.seeds.front(), "eval"));
  const EvalOutcome outcome = evaluate_greedy(world, *map, file.weights, starts.value_or(config.eval_starts),
                                              horizon.value_or(config.horizon), rng);
  std::cout << "success_fraction=" << outcome.success_fraction() << " successes=" << outcome.successes
            << " starts=" << outcome.starts << '\n';
  return 0;
}

int run_sweep_cmd(const Overrides& o, bool quiet) {
  const ExperimentConfig config = resolve(o);
  const fs::path out = prepare_out(o.out);
  const SweepTable table = run_sweep(config, [&](const SweepCell& cell) {
    if (quiet) return;
    std::cerr << "gamma=" << cell.gamma << " op=" << to_string(cell.op);
    if (cell.beta) std::cerr << " beta=" << *cell.beta;
    std::cerr << " seed=" << cell.seed << " ";
    if (cell.success_fraction)
      std::cerr << "success=" << *cell.success_fraction;
    else
      std::cerr << "error: " << cell.error;
    std::cerr << '\n';
  });
  write_csv(table, out / "results.csv");
  write_summary_csv(summarize(table), out / "summary.csv");
  render_chart(table, out / "chart.svg", "world " + config.world + ", " + to_string(config.representation));
  std::cout << (out / "results.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares policy iteration with soft policy improvement"};
  app.require_subcommand(1);

  Overrides o;
  std::string batch_path, representation, sfa_model_path, weights_path;
  std::optional<int> starts, horizon;
  bool quiet = false;

  auto* collect = app.add_subcommand("collect", "collect a random-walk batch");
  add_experiment_flags(collect, o);

  auto* sfa = app.add_subcommand("sfa-fit", "fit slow features to a batch");
  add_experiment_flags(sfa, o);
  sfa->add_option("--batch", batch_path, "batch CSV")->required()->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "run LSPI on a batch");
  add_experiment_flags(train, o);
  train->add_option("--batch", batch_path, "batch CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--representation", representation, "fourier or sfa")
      ->check(CLI::IsMember({"fourier", "sfa"}));
  train->add_option("--sfa-model", sfa_model_path, "SFA model (fitted on the batch when omitted)")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "greedy success fraction of trained weights");
  add_experiment_flags(eval, o);
  eval->add_option("--weights", weights_path, "weights file")->required()->check(CLI::ExistingFile);
  eval->add_option("--sfa-model", sfa_model_path, "SFA model for SFA weights")->check(CLI::ExistingFile);
  eval->add_option("--starts", starts, "evaluation start states");
  eval->add_option("--horizon", horizon, "actions per trajectory");

  auto* sweep = app.add_subcommand("sweep", "gamma x operator x seed sweep to CSV and SVG");
  add_experiment_flags(sweep, o);
  sweep->add_flag("--quiet", quiet, "no per-cell progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*collect) return run_collect(o);
    if (*sfa) return run_sfa_fit(o, batch_path);
    if (*train) return run_train(o, batch_path, representation, sfa_model_path);
    if (*eval) return run_eval(o, weights_path, sfa_model_path, starts, horizon);
    if (*sweep) return run_sweep_cmd(o, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
