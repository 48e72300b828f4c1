#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "softlspi/bench.hpp"
#include "softlspi/errors.hpp"

namespace softlspi {

using nlohmann::json;

void ExperimentConfig::validate() const {
  make_world(world);
  improvement.validate();
  if (gamma_grid.empty()) throw ConfigError("gamma_grid must not be empty");
  for (const double g : gamma_grid)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("every gamma must lie in [0, 1)");
  if (improvement.kind == OperatorKind::Softmax)
    for (const double b : beta_grid)
      if (!(std::isfinite(b) && b >= 0.0)) throw ConfigError("every beta must be finite and >= 0");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_starts < 1) throw ConfigError("eval_starts must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(solver.ridge >= 0.0)) throw ConfigError("solver.ridge must be >= 0");
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  if (solver.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (fourier_terms < 1) throw ConfigError("fourier_terms must be >= 1");
  if (representation == Representation::Sfa) {
    if (!(sfa.novelty_threshold > 0.0 && sfa.novelty_threshold < 1.0))
      throw ConfigError("sfa.novelty_threshold must lie in (0, 1)");
    if (sfa.max_dictionary < 1) throw ConfigError("sfa.max_dictionary must be >= 1");
    if (!(sfa.kernel_width > 0.0)) throw ConfigError("sfa.kernel_width must be > 0");
    if (!(sfa.ridge >= 0.0)) throw ConfigError("sfa.ridge must be >= 0");
    if (sfa.features < 1) throw ConfigError("sfa.features must be >= 1");
  }
}

ExperimentConfig desk_preset() { return ExperimentConfig{}; }

ExperimentConfig paper_preset() {
  ExperimentConfig config;
  config.batch_size = 50000;
  config.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  config.fourier_terms = 10;
  return config;
}

namespace {

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read_if(const json& object, const char* key, T& target) {
  if (object.contains(key)) target = object.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  ExperimentConfig config;
  try {
    const json doc = json::parse(json_text);
    reject_unknown_keys(doc,
                        {"world", "representation", "improvement", "include_greedy", "gamma_grid",
                         "beta_grid", "seeds", "batch_size", "eval_starts", "horizon", "solver",
                         "fourier_terms", "sfa", "record_wall_time"},
                        "");
    read_if(doc, "world", config.world);
    if (doc.contains("representation"))
      config.representation = parse_representation(doc.at("representation").get<std::string>());
    if (doc.contains("improvement")) {
      const json& imp = doc.at("improvement");
      reject_unknown_keys(imp, {"kind", "beta", "epsilon", "normalize"}, "improvement.");
      if (imp.contains("kind")) config.improvement.kind = parse_operator_kind(imp.at("kind").get<std::string>());
      read_if(imp, "beta", config.improvement.beta);
      read_if(imp, "epsilon", config.improvement.epsilon);
      read_if(imp, "normalize", config.improvement.normalize);
    }
    read_if(doc, "include_greedy", config.include_greedy);
    read_if(doc, "gamma_grid", config.gamma_grid);
    read_if(doc, "beta_grid", config.beta_grid);
    read_if(doc, "seeds", config.seeds);
    read_if(doc, "batch_size", config.batch_size);
    read_if(doc, "eval_starts", config.eval_starts);
    read_if(doc, "horizon", config.horizon);
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      reject_unknown_keys(s, {"ridge", "tol", "max_iters"}, "solver.");
      read_if(s, "ridge", config.solver.ridge);
      read_if(s, "tol", config.solver.tol);
      read_if(s, "max_iters", config.solver.max_iters);
    }
    read_if(doc, "fourier_terms", config.fourier_terms);
    if (doc.contains("sfa")) {
      const json& s = doc.at("sfa");
      reject_unknown_keys(s, {"novelty_threshold", "max_dictionary", "kernel_width", "ridge", "features"},
                          "sfa.");
      read_if(s, "novelty_threshold", config.sfa.novelty_threshold);
      read_if(s, "max_dictionary", config.sfa.max_dictionary);
      read_if(s, "kernel_width", config.sfa.kernel_width);
      read_if(s, "ridge", config.sfa.ridge);
      read_if(s, "features", config.sfa.features);
    }
    read_if(doc, "record_wall_time", config.record_wall_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string to_json(const ExperimentConfig& config) {
  json doc;
  doc["world"] = config.world;
  doc["representation"] = to_string(config.representation);
  doc["improvement"] = {{"kind", to_string(config.improvement.kind)},
                        {"beta", config.improvement.beta},
                        {"epsilon", config.improvement.epsilon},
                        {"normalize", config.improvement.normalize}};
  doc["include_greedy"] = config.include_greedy;
  doc["gamma_grid"] = config.gamma_grid;
  doc["beta_grid"] = config.beta_grid;
  doc["seeds"] = config.seeds;
  doc["batch_size"] = config.batch_size;
  doc["eval_starts"] = config.eval_starts;
  doc["horizon"] = config.horizon;
  doc["solver"] = {{"ridge", config.solver.ridge},
                   {"tol", config.solver.tol},
                   {"max_iters", config.solver.max_iters}};
  doc["fourier_terms"] = config.fourier_terms;
  doc["sfa"] = {{"novelty_threshold", config.sfa.novelty_threshold},
                {"max_dictionary", config.sfa.max_dictionary},
                {"kernel_width", config.sfa.kernel_width},
                {"ridge", config.sfa.ridge},
                {"features", config.sfa.features}};
  doc["record_wall_time"] = config.record_wall_time;
  return doc.dump(2);
}

}  // namespace softlspi
