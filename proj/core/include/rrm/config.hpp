#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rrm/dqn.hpp"
#include "rrm/env.hpp"
#include "rrm/harness.hpp"

namespace rrm {

/// Offline dataset collection for the percentile and reward statistics.
struct NormCollection {
  int episodes = 40;
  int levels = 20;  // Q
  std::uint64_t seed = 1;
};

/// Everything a run needs; missing JSON keys keep these defaults.
struct RunConfig {
  EnvConfig env{};
  TrainerConfig trainer{};
  NormCollection normalization{};
  ValidationOptions validation{};
  std::uint64_t validation_seed = 2;
  int test_envs = 100;
  std::uint64_t test_seed = 3;

  void validate() const;
};

void to_json(nlohmann::json& j, const NormCollection& c);
void from_json(const nlohmann::json& j, NormCollection& c);
void to_json(nlohmann::json& j, const ValidationOptions& c);
void from_json(const nlohmann::json& j, ValidationOptions& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::string& path);

}  // namespace rrm
