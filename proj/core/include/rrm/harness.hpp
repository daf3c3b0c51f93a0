#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rrm/baselines.hpp"
#include "rrm/env.hpp"
#include "rrm/nn.hpp"
#include "rrm/normalize.hpp"

namespace rrm {

// ---------------------------------------------------------------- metrics

/// Network-level outcome of one episode. Rates in bps/Hz.
struct EpisodeMetrics {
  std::vector<double> ue_rates;
  double sum_rate = 0.0;
  double pct5_rate = 0.0;
  double score = 0.0;  // sum_rate / K + 3 * pct5_rate
};

/// Largest R with |{j : R_j >= R}| >= 0.95 K, i.e. the (floor(K/20)+1)-th
/// smallest rate.
double fifth_percentile(std::span<const double> rates);

EpisodeMetrics episode_metrics(std::span<const double> ue_rates);

/// a dominates b: no worse in sum-rate and 5th percentile, strictly better in one.
bool dominates(double a_sum, double a_pct5, double b_sum, double b_pct5);
inline bool dominates(const EpisodeMetrics& a, const EpisodeMetrics& b) {
  return dominates(a.sum_rate, a.pct5_rate, b.sum_rate, b.pct5_rate);
}

inline double to_mbps(double bps_per_hz, double bandwidth_hz) { return bps_per_hz * bandwidth_hz / 1e6; }

// ---------------------------------------------------------------- policies

/// Greedy (or epsilon-greedy) action selection through a trained network.
struct AgentPolicy {
  const Mlp* net = nullptr;
  PercentileMapper mapper;
  double epsilon = 0.0;
};

/// Uniform over the full action space.
struct RandomPolicy {};

using Policy = std::variant<BaselineKind, AgentPolicy, RandomPolicy>;

std::string policy_name(const Policy& policy);

/// Per-agent observations stacked as the columns of a D x N matrix, mapped.
Eigen::MatrixXd mapped_observations(const std::vector<Observation>& obs,
                                    const PercentileMapper& mapper);

/// Per agent: with probability epsilon a uniform action, otherwise the argmax
/// of the network's Q-values (lowest index on ties). `net` may be null only
/// when epsilon >= 1.
std::vector<int> select_actions(const Mlp* net, const Eigen::MatrixXd& mapped_obs, double epsilon,
                                int num_actions, Rng& rng);

/// Called after every step with the observations the policy acted on.
using StepObserver =
    std::function<void(const Environment& env, const std::vector<Observation>& acted_on,
                       const StepResult& result)>;

/// Plays one full episode on realization `env_seed`.
EpisodeMetrics run_episode(const Policy& policy, const EnvConfig& config, std::uint64_t env_seed,
                           std::uint64_t policy_seed, const StepObserver& observer = {});

// ---------------------------------------------------------------- environment sets

struct SetMember {
  std::uint64_t seed = 0;
  Deployment deployment;
  // Reference baseline metrics (bps/Hz), filled for validation sets.
  std::optional<EpisodeMetrics> full_reuse;
  std::optional<EpisodeMetrics> tdm;
};

/// Persisted environment realizations; each is replayed from its seed.
struct EnvironmentSet {
  EnvConfig config;
  std::string config_fingerprint;
  std::vector<SetMember> members;
  // Population means the validation members were accepted against.
  double tolerance = 0.0;
  double ref_full_reuse_sum = 0.0, ref_full_reuse_pct5 = 0.0;
  double ref_tdm_sum = 0.0, ref_tdm_pct5 = 0.0;

  std::vector<std::uint64_t> seeds() const;
};

void to_json(nlohmann::json& j, const EnvironmentSet& s);
void from_json(const nlohmann::json& j, EnvironmentSet& s);
EnvironmentSet load_environment_set(const std::string& path);
void save_environment_set(const EnvironmentSet& set, const std::string& path);

/// `count` random realizations with seeds drawn from `seed`.
EnvironmentSet make_environment_set(const EnvConfig& config, int count, std::uint64_t seed);

struct ValidationOptions {
  int target_count = 10;
  int population_size = 100;
  double tolerance = 0.05;
  int max_candidates = 50'000;
};

/// Keeps realizations whose full-reuse and TDM sum-rate and 5th percentile
/// are all within `tolerance` (relative) of the means over a random
/// population. Throws InsufficientCandidates if max_candidates run out.
EnvironmentSet build_validation_set(const EnvConfig& config, const ValidationOptions& options,
                                    std::uint64_t seed);

/// True iff the member's stored metrics sit inside the set's band.
bool within_band(const EnvironmentSet& set, const EpisodeMetrics& full_reuse,
                 const EpisodeMetrics& tdm);

// ---------------------------------------------------------------- evaluation

struct Evaluation {
  std::string policy;
  std::vector<EpisodeMetrics> per_env;
  double mean_sum_rate = 0.0, std_sum_rate = 0.0;
  double mean_pct5 = 0.0, std_pct5 = 0.0;
  double mean_score = 0.0, std_score = 0.0;
};

/// Rolls the policy out once on every seed and averages the metrics.
Evaluation evaluate(const Policy& policy, const EnvConfig& config,
                    std::span<const std::uint64_t> env_seeds, std::uint64_t policy_seed = 0);

/// Mean and standard deviation across independently trained models.
struct SeedAggregate {
  double mean_sum_rate = 0.0, std_sum_rate = 0.0;
  double mean_pct5 = 0.0, std_pct5 = 0.0;
  double mean_score = 0.0, std_score = 0.0;
  int seeds = 0;
};
SeedAggregate aggregate_over_seeds(std::span<const Evaluation> runs);

void to_json(nlohmann::json& j, const Evaluation& e);

// ---------------------------------------------------------------- analyses

/// Mean long-term UE SINR (dB) when interference is counted only from the
/// n' APs closest to the serving AP, for n' = 0..max_interferers. All APs
/// transmit at P_max; fading is averaged out.
std::vector<double> interference_profile(const EnvConfig& config, int max_interferers,
                                         int num_realizations, std::uint64_t seed);

/// One CSV row per agent-interval: the local top-UE weight/SINR, the local
/// top-k PF ratios, each remote block's top PF, the action and its effect.
/// Returns the number of rows written.
long export_decision_log(const Policy& policy, const EnvConfig& config,
                         std::span<const std::uint64_t> env_seeds, std::ostream& out);

/// Per-interval trace rows: t, ap, action, ue, power_dbm, rate_bpshz, reward.
long export_episode_trace(const Policy& policy, const EnvConfig& config, std::uint64_t env_seed,
                          std::ostream& out);

}  // namespace rrm
