#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rrm/channel.hpp"
#include "rrm/linklevel.hpp"
#include "rrm/topology.hpp"

namespace rrm {

struct EnvConfig {
  DeploymentConfig deployment{};
  ChannelConfig channel{};
  LinkParams link{};

  int episode_length = 2000;     // T
  int top_k = 3;                 // observable UEs per agent
  int num_remote = 3;            // remote agents per agent
  int power_levels = 1;          // positive power levels
  double power_range_db = 20.0;  // span of the levels below P_max when power_levels > 1
  int feedback_period = 10;      // intervals between UE reports
  int feedback_delay = 5;        // UE -> serving AP
  int backhaul_delay = 5;        // serving AP -> neighbours, on top of feedback_delay
  double reward_exponent = 0.8;
  bool sort_by_pf = true;
  double default_weight = 0.0;
  double default_sinr_db = -60.0;
  double p_max_dbm = 10.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 10e6;

  double p_max_w() const { return dbm_to_watts(p_max_dbm); }
  double noise_w() const;
  int observation_size() const { return 2 * (num_remote + 1) * top_k; }
  int num_actions() const { return 1 + power_levels * top_k; }
  /// Transmit powers (W) of the positive levels, ascending; last is P_max.
  std::vector<double> power_levels_w() const;

  void validate() const;
};

void to_json(nlohmann::json& j, const EnvConfig& c);
void from_json(const nlohmann::json& j, EnvConfig& c);

/// What occupies one UE slot of an observation.
struct SlotTag {
  int ue = -1;          // -1: padding, no UE behind the slot
  int t_measured = -1;  // -1: no report has arrived yet (default values shown)
};

/// Fixed-size per-agent observation: k (weight, SINR dB) slots for the local
/// AP followed by k slots for each remote AP in ascending distance order.
struct Observation {
  std::vector<double> values;  // size 2(n+1)k, raw (weight, sinr_db) pairs
  std::vector<SlotTag> slots;  // size (n+1)k
  std::vector<double> pf;      // PF ratio behind each slot, 0 for padding

  double weight(int slot) const { return values[2 * slot]; }
  double sinr_db(int slot) const { return values[2 * slot + 1]; }
};

/// A UE as seen from some vantage point (AP-visible reports or ground truth).
struct UeView {
  int ue = -1;
  double weight = 0.0;
  double sinr = 0.0;  // linear
  int t_measured = -1;

  double pf() const { return pf_ratio(weight, sinr); }
};

struct DecodedAction {
  ScheduleDecision decision{};
  bool invalid = false;  // selected a slot without a UE
  int slot = -1;
  int level = -1;
};

/// 0 -> off; a in [1, pk] -> power level (a-1)/k, UE slot (a-1) mod k.
/// A slot without a UE decodes to off with the invalid flag set.
DecodedAction decode_action(int action, const Observation& local_obs, const EnvConfig& config);

/// Weighted sum-rate reward, identical for every agent, with two overrides:
/// if every AP is off the agent whose top UE has the highest PF receives
/// minus that PF and the rest 0; an agent flagged invalid always receives 0.
std::vector<double> compute_reward(std::span<const ScheduleDecision> decisions,
                                   std::span<const double> served_rates,
                                   std::span<const double> served_weights, double reward_exponent,
                                   std::span<const char> invalid, std::span<const double> top_pf);

struct StepInfo {
  long t = 0;  // interval the step was taken in
  std::vector<int> actions;  // empty when stepped with explicit decisions
  std::vector<ScheduleDecision> decisions;
  std::vector<char> invalid;
  std::vector<double> ue_rates;     // bps/Hz per UE
  std::vector<double> served_rates; // bps/Hz per AP, 0 when off
};

struct StepResult {
  std::vector<Observation> observations;
  std::vector<double> rewards;
  bool done = false;
  StepInfo info;
};

/// Episodic multi-AP downlink network. Single writer: step() mutates state.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  std::vector<Observation> reset(std::uint64_t seed);
  StepResult step(std::span<const int> actions);
  /// Steps with decisions chosen outside the agent action space (baselines).
  StepResult step_decisions(std::span<const ScheduleDecision> decisions);

  const EnvConfig& config() const { return config_; }
  int num_agents() const { return deployment_.num_aps(); }
  int num_ues() const { return deployment_.num_ues(); }
  long t() const { return t_; }
  bool done() const { return t_ > config_.episode_length; }
  std::uint64_t seed() const { return seed_; }

  const Deployment& deployment() const { return deployment_; }
  const LongTermGains& long_term() const { return long_term_; }
  const FadingProcess& fading() const { return fading_; }
  /// |h_ji(t)|^2 at the current interval.
  const Eigen::MatrixXd& power_gains() const { return gains_t_; }
  const std::vector<LinkStats>& link_stats() const { return stats_; }
  const std::vector<Observation>& observations() const { return obs_; }

  /// Per AP, every pool member with the latest reports visible at that AP.
  std::vector<std::vector<UeView>> local_views() const;
  /// Per AP, every pool member with current true weight and measured SINR.
  std::vector<std::vector<UeView>> true_views() const;
  /// Per UE, (1/steps) * sum of achieved rates so far this episode.
  std::vector<double> episode_average_rates() const;

  std::vector<Observation> build_observations() const;

 private:
  struct ReportBatch {
    long t_measured = 0;
    std::vector<double> weight;
    std::vector<double> sinr;  // linear
  };

  const ReportBatch* visible_batch(long delay) const;
  std::vector<std::vector<UeView>> views_with_delay(long delay) const;
  void maybe_generate_reports();
  void advance_to(long t);
  StepResult finish_step(std::vector<ScheduleDecision> decisions, std::vector<char> invalid,
                         std::vector<int> actions);
  double visible_weight(int ue) const;

  EnvConfig config_;
  std::vector<double> levels_w_;
  double noise_w_ = 0.0;
  double p_max_w_ = 0.0;

  std::uint64_t seed_ = 0;
  long t_ = 0;
  Deployment deployment_;
  LongTermGains long_term_;
  FadingProcess fading_;
  Eigen::MatrixXd gains_t_;
  std::vector<LinkStats> stats_;
  std::vector<double> rate_sum_;
  std::deque<ReportBatch> reports_;
  std::vector<Observation> obs_;
};

}  // namespace rrm
