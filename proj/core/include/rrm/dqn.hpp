#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rrm/env.hpp"
#include "rrm/harness.hpp"
#include "rrm/nn.hpp"
#include "rrm/normalize.hpp"

namespace rrm {

/// One interval of one environment: every agent's mapped observation (as
/// columns), action and normalized reward.
struct Transition {
  Eigen::MatrixXd obs;       // D x N
  std::vector<int> actions;  // N
  std::vector<double> rewards;
  Eigen::MatrixXd next_obs;  // D x N
  bool done = false;
};

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  /// `count` distinct indices, uniformly. Throws BufferUnderfilled if count > size().
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> items_;
};

/// Flattened minibatch: every agent of every sampled interval is one column.
struct Minibatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd next_obs;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  Eigen::VectorXd not_done;  // 0 for terminal transitions
};

Minibatch gather_minibatch(const ReplayBuffer& buffer, std::span<const std::size_t> indices);

/// y = r + gamma * not_done * Q_target(s', argmax_a Q_online(s', a)).
Eigen::VectorXd double_dqn_targets(const Minibatch& batch, const Mlp& online, const Mlp& target,
                                   double gamma);

/// Mean squared TD error on the taken actions, and its parameter gradient.
double td_loss_and_gradient(const Mlp& online, const Minibatch& batch,
                            const Eigen::VectorXd& targets, std::vector<double>* grads);

struct TrainerConfig {
  int num_envs = 4;
  int episodes = 2000;          // total across environments
  int epoch_episodes = 10;      // episodes between validation passes
  std::size_t buffer_capacity = 25'000;
  int batch_intervals = 1024;   // sampled intervals per update; batch = this * N agents
  long train_period = 100;      // intervals (summed over envs) between updates
  long target_sync = 10'000;    // intervals (summed over envs) between target copies
  double gamma = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  int epsilon_decay_episodes = 25;
  double eval_epsilon = 0.0;    // exploration during validation rollouts
  int hidden = 128;
  int hidden_layers = 2;
  AdamConfig adam{};
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_for_episode(long episode) const;
};

void to_json(nlohmann::json& j, const TrainerConfig& c);
void from_json(const nlohmann::json& j, TrainerConfig& c);

/// One gradient step on a sampled minibatch. Returns the loss.
double train_step(const ReplayBuffer& buffer, Mlp& online, const Mlp& target, AdamState& adam,
                  const TrainerConfig& config, Rng& rng);

struct EpochRecord {
  int epoch = 0;  // 1-based
  long episodes = 0;
  long updates = 0;
  double epsilon = 0.0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  double sum_rate_mbps = 0.0;
  double pct5_mbps = 0.0;
  double score = 0.0;  // Mbps
};

struct TrainingResult {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  Mlp best_net;
  Mlp final_net;
  long adam_step = 0;
};

struct TrainingOutput {
  std::string dir;  // empty: nothing written
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains one shared network with `num_envs` environments stepped in
/// lockstep. After every `epoch_episodes` finished episodes the greedy policy
/// is scored on `validation_seeds`. When `output.dir` is set, writes
/// training_log.csv, checkpoints/epoch_NNNN.ckpt and best.ckpt there.
TrainingResult run_training(const EnvConfig& env_config, const TrainerConfig& config,
                            const NormalizationStats& norm,
                            std::span<const std::uint64_t> validation_seeds,
                            const TrainingOutput& output = {});

/// Header and rows of training_log.csv.
std::string training_log_csv(const std::vector<EpochRecord>& epochs);

}  // namespace rrm
