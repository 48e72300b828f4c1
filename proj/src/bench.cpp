#include "softlspi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <tuple>

#include "softlspi/errors.hpp"
#include "text_util.hpp"

namespace softlspi {

std::string to_string(Representation r) { return r == Representation::Sfa ? "sfa" : "fourier"; }

Representation parse_representation(std::string_view text) {
  if (text == "fourier") return Representation::Fourier;
  if (text == "sfa") return Representation::Sfa;
  throw ConfigError("unknown representation '" + std::string(text) + "' (fourier, sfa)");
}

EvalOutcome evaluate_controller(const WorldSpec& world, const Controller& controller, int starts,
                                int horizon, Rng& rng) {
  if (starts < 0 || horizon < 0) throw ContractError("evaluate: negative start count or horizon");
  EvalOutcome outcome{0, starts};
  for (int i = 0; i < starts; ++i) {
    Pose pose = sample_start(world, rng);
    for (int t = 0; t < horizon; ++t) {
      const StepResult r = step(world, pose, controller(pose));
      if (r.crashed) break;
      if (r.terminal) {
        ++outcome.successes;
        break;
      }
      pose = r.next_pose;
    }
  }
  return outcome;
}

EvalOutcome evaluate_greedy(const WorldSpec& world, const FeatureMap& map, const QWeights& weights,
                            int starts, int horizon, Rng& rng) {
  if (weights.size() != map.dim()) throw ContractError("evaluate: weights do not match feature map");
  return evaluate_controller(
      world, [&](const Pose& pose) { return greedy_action(map, weights, pose); }, starts, horizon,
      rng);
}

double evaluate_policy(const WorldSpec& world, const FeatureMap& map, const QWeights& weights,
                       int starts, int horizon, Rng& rng) {
  return evaluate_greedy(world, map, weights, starts, horizon, rng).success_fraction();
}

std::vector<ImprovementConfig> sweep_operators(const ExperimentConfig& config) {
  std::vector<ImprovementConfig> ops;
  const ImprovementConfig& base = config.improvement;
  if (config.include_greedy && base.kind != OperatorKind::Greedy) ops.push_back(ImprovementConfig::greedy());
  switch (base.kind) {
    case OperatorKind::Greedy:
      ops.push_back(base);
      break;
    case OperatorKind::Softmax:
      if (config.beta_grid.empty()) {
        ops.push_back(base);
      } else {
        for (const double beta : config.beta_grid) {
          ImprovementConfig op = base;
          op.beta = beta;
          ops.push_back(op);
        }
      }
      break;
    case OperatorKind::EpsilonGreedy:
      ops.push_back(base);
      break;
  }
  return ops;
}

std::uint64_t batch_seed(std::uint64_t root_seed) { return derive_seed(root_seed, "collect"); }

std::uint64_t eval_seed(std::uint64_t root_seed, double gamma, const ImprovementConfig& improvement) {
  const bool greedy = improvement.kind == OperatorKind::Greedy;
  return derive_seed(root_seed, "eval",
                     {double_key(gamma), static_cast<std::uint64_t>(improvement.kind),
                      greedy ? 0 : static_cast<std::uint64_t>(improvement.normalize),
                      improvement.kind == OperatorKind::Softmax ? double_key(improvement.beta) : 0,
                      improvement.kind == OperatorKind::EpsilonGreedy ? double_key(improvement.epsilon)
                                                                      : 0});
}

namespace {

SweepCell make_cell(const ExperimentConfig& config, std::uint64_t seed, double gamma,
                    const ImprovementConfig& op) {
  SweepCell cell;
  cell.world = make_world(config.world).name();
  cell.representation = config.representation;
  cell.op = op.kind;
  cell.normalize = op.kind != OperatorKind::Greedy && op.normalize;
  cell.gamma = gamma;
  if (op.kind == OperatorKind::Softmax) cell.beta = op.beta;
  if (op.kind == OperatorKind::EpsilonGreedy) cell.epsilon = op.epsilon;
  cell.seed = seed;
  cell.batch_size = config.batch_size;
  return cell;
}

std::unique_ptr<FeatureMap> build_representation(const ExperimentConfig& config, const Batch& batch) {
  if (config.representation == Representation::Fourier)
    return std::make_unique<FourierBasis>(config.fourier_terms);
  return std::make_unique<SfaFeatureMap>(std::make_shared<const SfaModel>(fit_sfa(batch, config.sfa)));
}

auto sort_key(const SweepCell& c) {
  return std::make_tuple(c.gamma, c.beta.value_or(-INFINITY), static_cast<int>(c.op),
                         c.normalize, c.epsilon.value_or(-INFINITY), c.seed);
}

}  // namespace

void sort_table(SweepTable& table) {
  std::stable_sort(table.begin(), table.end(),
                   [](const SweepCell& a, const SweepCell& b) { return sort_key(a) < sort_key(b); });
}

SweepTable run_sweep(const ExperimentConfig& config, const ProgressCallback& progress) {
  config.validate();
  const WorldSpec world = make_world(config.world);
  const std::vector<ImprovementConfig> ops = sweep_operators(config);
  const LspiOptions options{config.solver.max_iters, config.solver.tol, config.solver.ridge, {}};

  SweepTable table;
  for (const std::uint64_t seed : config.seeds) {
    std::unique_ptr<FeatureMap> map;
    std::unique_ptr<LstdAssembler> assembler;
    std::string setup_error;
    try {
      const Batch batch = collect_random_walk(world, config.batch_size, batch_seed(seed));
      map = build_representation(config, batch);
      assembler = std::make_unique<LstdAssembler>(featurize(batch, *map));
    } catch (const Error& e) {
      setup_error = e.what();
    }
    for (const double gamma : config.gamma_grid) {
      for (const ImprovementConfig& op : ops) {
        SweepCell cell = make_cell(config, seed, gamma, op);
        const auto started = std::chrono::steady_clock::now();
        if (!setup_error.empty()) {
          cell.error = setup_error;
        } else {
          try {
            const LspiResult result = lspi_train(*assembler, gamma, op, options);
            cell.iterations = result.iterations;
            cell.converged = result.converged;
            Rng rng(eval_seed(seed, gamma, op));
            cell.success_fraction =
                evaluate_policy(world, *map, result.w, config.eval_starts, config.horizon, rng);
          } catch (const Error& e) {
            cell.error = e.what();
          }
        }
        if (config.record_wall_time) {
          cell.wall_time_s =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
        if (progress) progress(cell);
        table.push_back(std::move(cell));
      }
    }
  }
  sort_table(table);
  return table;
}

namespace {

constexpr const char* kCsvHeader =
    "world,representation,operator,normalize,gamma,beta,epsilon,seed,batch_size,"
    "success_fraction,iterations,converged,wall_time_s,error";

std::string optional_field(const std::optional<double>& v) {
  return v ? detail::format_double(*v) : std::string();
}

std::optional<double> parse_optional(std::string_view field) {
  field = detail::trim(field);
  if (field.empty()) return std::nullopt;
  return detail::parse_double(field);
}

std::string sanitize(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; },
                  ';');
  return text;
}

}  // namespace

void write_csv(const SweepTable& table, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const SweepCell& c : table) {
    out << c.world << ',' << to_string(c.representation) << ',' << to_string(c.op) << ','
        << (c.normalize ? "true" : "false") << ',' << detail::format_double(c.gamma) << ','
        << optional_field(c.beta) << ',' << optional_field(c.epsilon) << ',' << c.seed << ','
        << c.batch_size << ',' << optional_field(c.success_fraction) << ',' << c.iterations << ','
        << (c.converged ? "true" : "false") << ',' << optional_field(c.wall_time_s) << ','
        << sanitize(c.error) << '\n';
  }
}

void write_csv(const SweepTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_csv(table, out);
  if (!out) throw DataError("write failed: '" + path.string() + "'");
}

SweepTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCsvHeader)
    throw DataError("sweep CSV: unexpected header");
  auto parse_bool = [](std::string_view f) {
    f = detail::trim(f);
    if (f == "true") return true;
    if (f == "false") return false;
    throw DataError("sweep CSV: bad boolean '" + std::string(f) + "'");
  };
  SweepTable table;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 14) throw DataError("sweep CSV: expected 14 fields");
    SweepCell c;
    c.world = std::string(detail::trim(f[0]));
    c.representation = parse_representation(detail::trim(f[1]));
    c.op = parse_operator_kind(detail::trim(f[2]));
    c.normalize = parse_bool(f[3]);
    c.gamma = detail::parse_double(f[4]);
    c.beta = parse_optional(f[5]);
    c.epsilon = parse_optional(f[6]);
    c.seed = detail::parse_int<std::uint64_t>(f[7]);
    c.batch_size = detail::parse_int<std::size_t>(f[8]);
    c.success_fraction = parse_optional(f[9]);
    c.iterations = detail::parse_int<int>(f[10]);
    c.converged = parse_bool(f[11]);
    c.wall_time_s = parse_optional(f[12]);
    c.error = std::string(detail::trim(f[13]));
    table.push_back(std::move(c));
  }
  return table;
}

SweepTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sweep CSV '" + path.string() + "'");
  return read_csv(in);
}

std::vector<SummaryRow> summarize(const SweepTable& table) {
  using Key = std::tuple<int, int, bool, double, double, double>;
  std::map<Key, std::vector<const SweepCell*>> groups;
  for (const SweepCell& c : table) {
    const Key key{static_cast<int>(c.representation), static_cast<int>(c.op), c.normalize,
                  c.beta.value_or(-INFINITY), c.epsilon.value_or(-INFINITY), c.gamma};
    groups[key].push_back(&c);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, cells] : groups) {
    const SweepCell& first = *cells.front();
    SummaryRow row{first.representation, first.op, first.normalize, first.beta, first.epsilon,
                   first.gamma, 0.0, 0.0, 0, 0};
    double sum = 0.0;
    for (const SweepCell* c : cells) {
      if (c->success_fraction) {
        sum += *c->success_fraction;
        ++row.count;
      } else {
        ++row.failures;
      }
    }
    if (row.count > 0) {
      row.mean = sum / row.count;
      double sq = 0.0;
      for (const SweepCell* c : cells)
        if (c->success_fraction) sq += (*c->success_fraction - row.mean) * (*c->success_fraction - row.mean);
      row.std = std::sqrt(sq / row.count);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& out) {
  out << "representation,operator,normalize,beta,epsilon,gamma,mean_success,std_success,seeds,"
         "failed_seeds\n";
  for (const SummaryRow& r : summary) {
    out << to_string(r.representation) << ',' << to_string(r.op) << ','
        << (r.normalize ? "true" : "false") << ',' << optional_field(r.beta) << ','
        << optional_field(r.epsilon) << ',' << detail::format_double(r.gamma) << ','
        << detail::format_double(r.mean) << ',' << detail::format_double(r.std) << ',' << r.count
        << ',' << r.failures << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& summary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_summary_csv(summary, out);
}

std::string series_label(const SummaryRow& row) {
  std::string label = "operator=" + to_string(row.op);
  if (row.beta) label += " beta=" + detail::format_double(*row.beta);
  if (row.epsilon) label += " epsilon=" + detail::format_double(*row.epsilon);
  if (row.normalize) label += " normalize=true";
  label += " representation=" + to_string(row.representation);
  return label;
}

}  // namespace softlspi
