#include "rrm/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

void RunConfig::validate() const {
  env.validate();
  trainer.validate();
  if (normalization.episodes < 1 || normalization.levels < 2)
    throw std::invalid_argument("normalization: need >= 1 episode and >= 2 levels");
  if (validation.target_count < 1 || validation.population_size < 1 || validation.tolerance < 0.0)
    throw std::invalid_argument("validation: invalid options");
  if (test_envs < 0) throw std::invalid_argument("test_envs < 0");
}

void to_json(nlohmann::json& j, const NormCollection& c) {
  j = {{"episodes", c.episodes}, {"levels", c.levels}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, NormCollection& c) {
  const NormCollection d;
  c.episodes = j.value("episodes", d.episodes);
  c.levels = j.value("levels", d.levels);
  c.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const ValidationOptions& c) {
  j = {{"target_count", c.target_count},
       {"population_size", c.population_size},
       {"tolerance", c.tolerance},
       {"max_candidates", c.max_candidates}};
}

void from_json(const nlohmann::json& j, ValidationOptions& c) {
  const ValidationOptions d;
  c.target_count = j.value("target_count", d.target_count);
  c.population_size = j.value("population_size", d.population_size);
  c.tolerance = j.value("tolerance", d.tolerance);
  c.max_candidates = j.value("max_candidates", d.max_candidates);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"env", c.env},
       {"trainer", c.trainer},
       {"normalization", c.normalization},
       {"validation", c.validation},
       {"validation_seed", c.validation_seed},
       {"test_envs", c.test_envs},
       {"test_seed", c.test_seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  const RunConfig d;
  c.env = j.contains("env") ? j.at("env").get<EnvConfig>() : d.env;
  c.trainer = j.contains("trainer") ? j.at("trainer").get<TrainerConfig>() : d.trainer;
  c.normalization =
      j.contains("normalization") ? j.at("normalization").get<NormCollection>() : d.normalization;
  c.validation = j.contains("validation") ? j.at("validation").get<ValidationOptions>() : d.validation;
  c.validation_seed = j.value("validation_seed", d.validation_seed);
  c.test_envs = j.value("test_envs", d.test_envs);
  c.test_seed = j.value("test_seed", d.test_seed);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  RunConfig c = nlohmann::json::parse(in, nullptr, true, true).get<RunConfig>();
  c.validate();
  return c;
}

}  // namespace rrm
