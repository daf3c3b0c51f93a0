#include "rrm/dqn.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  items_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  if (count > items_.size())
    throw BufferUnderfilled("replay buffer holds " + std::to_string(items_.size()) +
                            " transitions, " + std::to_string(count) + " requested");
  std::vector<std::size_t> pool(items_.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

Minibatch gather_minibatch(const ReplayBuffer& buffer, std::span<const std::size_t> indices) {
  Minibatch b;
  if (indices.empty()) return b;
  const auto& first = buffer.at(indices[0]);
  const auto d = first.obs.rows();
  const auto n = first.obs.cols();
  const auto cols = n * static_cast<Eigen::Index>(indices.size());
  b.obs.resize(d, cols);
  b.next_obs.resize(d, cols);
  b.rewards.resize(cols);
  b.not_done.resize(cols);
  b.actions.resize(static_cast<std::size_t>(cols));
  for (std::size_t s = 0; s < indices.size(); ++s) {
    const auto& t = buffer.at(indices[s]);
    if (t.obs.cols() != n || t.obs.rows() != d)
      throw ShapeMismatch("gather_minibatch: transitions differ in shape");
    const Eigen::Index c0 = static_cast<Eigen::Index>(s) * n;
    b.obs.middleCols(c0, n) = t.obs;
    b.next_obs.middleCols(c0, n) = t.next_obs;
    for (Eigen::Index i = 0; i < n; ++i) {
      b.actions[c0 + i] = t.actions[i];
      b.rewards[c0 + i] = t.rewards[i];
      b.not_done[c0 + i] = t.done ? 0.0 : 1.0;
    }
  }
  return b;
}

Eigen::VectorXd double_dqn_targets(const Minibatch& batch, const Mlp& online, const Mlp& target,
                                   double gamma) {
  const Eigen::MatrixXd q_online = online.forward(batch.next_obs);
  const Eigen::MatrixXd q_target = target.forward(batch.next_obs);
  Eigen::VectorXd y(batch.rewards.size());
  for (Eigen::Index c = 0; c < y.size(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q_online.rows(); ++a)
      if (q_online(a, c) > q_online(best, c)) best = a;
    y[c] = batch.rewards[c] + gamma * batch.not_done[c] * q_target(best, c);
  }
  return y;
}

double td_loss_and_gradient(const Mlp& online, const Minibatch& batch,
                            const Eigen::VectorXd& targets, std::vector<double>* grads) {
  MlpCache cache;
  const Eigen::MatrixXd q = online.forward(batch.obs, cache);
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const int a = batch.actions[c];
    const double err = q(a, c) - targets[c];
    loss += err * err;
    out_grad(a, c) = 2.0 * err;
  }
  if (grads) *grads = online.backward(cache, out_grad);
  return loss / static_cast<double>(q.cols());
}

void TrainerConfig::validate() const {
  if (num_envs < 1) throw std::invalid_argument("trainer: num_envs < 1");
  if (episodes < 1) throw std::invalid_argument("trainer: episodes < 1");
  if (epoch_episodes < 1) throw std::invalid_argument("trainer: epoch_episodes < 1");
  if (batch_intervals < 1) throw std::invalid_argument("trainer: batch_intervals < 1");
  if (buffer_capacity < static_cast<std::size_t>(batch_intervals))
    throw std::invalid_argument("trainer: buffer smaller than one batch");
  if (train_period < 1 || target_sync < 1) throw std::invalid_argument("trainer: periods must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("trainer: gamma outside [0, 1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0 &&
        eval_epsilon >= 0.0 && eval_epsilon <= 1.0))
    throw std::invalid_argument("trainer: epsilon outside [0, 1]");
  if (epsilon_decay_episodes < 0) throw std::invalid_argument("trainer: negative epsilon decay");
  if (hidden < 1 || hidden_layers < 0) throw std::invalid_argument("trainer: invalid network size");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("trainer: learning rate <= 0");
}

double TrainerConfig::epsilon_for_episode(long episode) const {
  if (epsilon_decay_episodes == 0) return epsilon_end;
  const double f = std::min(1.0, static_cast<double>(episode) / epsilon_decay_episodes);
  return epsilon_start + f * (epsilon_end - epsilon_start);
}

void to_json(nlohmann::json& j, const TrainerConfig& c) {
  j = {{"num_envs", c.num_envs},
       {"episodes", c.episodes},
       {"epoch_episodes", c.epoch_episodes},
       {"buffer_capacity", c.buffer_capacity},
       {"batch_intervals", c.batch_intervals},
       {"train_period", c.train_period},
       {"target_sync", c.target_sync},
       {"gamma", c.gamma},
       {"epsilon_start", c.epsilon_start},
       {"epsilon_end", c.epsilon_end},
       {"epsilon_decay_episodes", c.epsilon_decay_episodes},
       {"eval_epsilon", c.eval_epsilon},
       {"hidden", c.hidden},
       {"hidden_layers", c.hidden_layers},
       {"learning_rate", c.adam.learning_rate},
       {"lr_decay_every", c.adam.decay_every},
       {"lr_decay_factor", c.adam.decay_factor},
       {"l2", c.adam.l2},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainerConfig& c) {
  TrainerConfig d;
  c.num_envs = j.value("num_envs", d.num_envs);
  c.episodes = j.value("episodes", d.episodes);
  c.epoch_episodes = j.value("epoch_episodes", d.epoch_episodes);
  c.buffer_capacity = j.value("buffer_capacity", d.buffer_capacity);
  c.batch_intervals = j.value("batch_intervals", d.batch_intervals);
  c.train_period = j.value("train_period", d.train_period);
  c.target_sync = j.value("target_sync", d.target_sync);
  c.gamma = j.value("gamma", d.gamma);
  c.epsilon_start = j.value("epsilon_start", d.epsilon_start);
  c.epsilon_end = j.value("epsilon_end", d.epsilon_end);
  c.epsilon_decay_episodes = j.value("epsilon_decay_episodes", d.epsilon_decay_episodes);
  c.eval_epsilon = j.value("eval_epsilon", d.eval_epsilon);
  c.hidden = j.value("hidden", d.hidden);
  c.hidden_layers = j.value("hidden_layers", d.hidden_layers);
  c.adam.learning_rate = j.value("learning_rate", d.adam.learning_rate);
  c.adam.decay_every = j.value("lr_decay_every", d.adam.decay_every);
  c.adam.decay_factor = j.value("lr_decay_factor", d.adam.decay_factor);
  c.adam.l2 = j.value("l2", d.adam.l2);
  c.seed = j.value("seed", d.seed);
  c.validate();
}

double train_step(const ReplayBuffer& buffer, Mlp& online, const Mlp& target, AdamState& adam,
                  const TrainerConfig& config, Rng& rng) {
  const auto idx = buffer.sample_indices(static_cast<std::size_t>(config.batch_intervals), rng);
  const Minibatch batch = gather_minibatch(buffer, idx);
  const Eigen::VectorXd y = double_dqn_targets(batch, online, target, config.gamma);
  std::vector<double> grads;
  const double loss = td_loss_and_gradient(online, batch, y, &grads);
  adam_update(online, grads, adam);
  return loss;
}

std::string training_log_csv(const std::vector<EpochRecord>& epochs) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,sum_rate_mbps,pct5_mbps,score\n";
  for (const auto& e : epochs)
    out << e.epoch << ',' << e.sum_rate_mbps << ',' << e.pct5_mbps << ',' << e.score << '\n';
  return out.str();
}

namespace {

std::vector<double> normalized(const std::vector<double>& rewards, const RewardNormalizer& n) {
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = n.normalize(rewards[i]);
  return out;
}

std::string epoch_file(int epoch) {
  std::ostringstream name;
  name << "epoch_";
  name.width(4);
  name.fill('0');
  name << epoch << ".ckpt";
  return name.str();
}

}  // namespace

TrainingResult run_training(const EnvConfig& env_config, const TrainerConfig& config,
                            const NormalizationStats& norm,
                            std::span<const std::uint64_t> validation_seeds,
                            const TrainingOutput& output) {
  env_config.validate();
  config.validate();
  if (validation_seeds.empty()) throw std::invalid_argument("run_training: empty validation set");

  namespace fs = std::filesystem;
  fs::path ckpt_dir;
  if (!output.dir.empty()) {
    ckpt_dir = fs::path(output.dir) / "checkpoints";
    fs::create_directories(ckpt_dir);
  }

  const MlpShape shape{env_config.observation_size(), config.hidden, config.hidden_layers,
                       env_config.num_actions(), Activation::Tanh};
  Rng init_rng(derive_seed(config.seed, 1));
  Rng act_rng(derive_seed(config.seed, 2));
  Rng sample_rng(derive_seed(config.seed, 3));
  const std::uint64_t episode_base = derive_seed(config.seed, 4);

  Mlp online(shape, init_rng);
  Mlp target = online;
  AdamState adam(config.adam, online.num_parameters());
  ReplayBuffer buffer(config.buffer_capacity);

  std::vector<Environment> envs(static_cast<std::size_t>(config.num_envs), Environment(env_config));
  std::vector<Eigen::MatrixXd> state(envs.size());
  std::vector<double> eps(envs.size());

  TrainingResult result;
  double best_score = -INFINITY;
  long completed = 0;
  long intervals = 0;
  long updates = 0;
  double loss_sum = 0.0;
  long loss_count = 0;

  while (completed < config.episodes) {
    const long active = std::min<long>(config.num_envs, config.episodes - completed);
    for (long e = 0; e < active; ++e) {
      const long episode = completed + e;
      state[e] = mapped_observations(
          envs[e].reset(derive_seed(episode_base, static_cast<std::uint64_t>(episode))), norm.mapper);
      eps[e] = config.epsilon_for_episode(episode);
    }

    bool running = true;
    while (running) {
      running = false;
      for (long e = 0; e < active; ++e) {
        if (envs[e].done()) continue;
        const auto actions =
            select_actions(&online, state[e], eps[e], env_config.num_actions(), act_rng);
        StepResult r = envs[e].step(actions);
        Eigen::MatrixXd next = mapped_observations(r.observations, norm.mapper);
        buffer.push({state[e], actions, normalized(r.rewards, norm.reward), next, r.done});
        state[e] = std::move(next);
        running = running || !r.done;

        ++intervals;
        if (intervals % config.train_period == 0 &&
            buffer.size() >= static_cast<std::size_t>(config.batch_intervals)) {
          loss_sum += train_step(buffer, online, target, adam, config, sample_rng);
          ++loss_count;
          ++updates;
        }
        if (intervals % config.target_sync == 0) target = online;
      }
    }

    const long before = completed;
    completed += active;
    if (completed / config.epoch_episodes == before / config.epoch_episodes &&
        completed < config.episodes)
      continue;

    EpochRecord rec;
    rec.epoch = static_cast<int>(result.epochs.size()) + 1;
    rec.episodes = completed;
    rec.updates = updates;
    rec.epsilon = config.epsilon_for_episode(completed);
    rec.learning_rate = adam.learning_rate();
    rec.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    loss_sum = 0.0;
    loss_count = 0;

    const Evaluation ev = evaluate(AgentPolicy{&online, norm.mapper, config.eval_epsilon}, env_config,
                                   validation_seeds, derive_seed(config.seed, 5));
    const double bw = env_config.bandwidth_hz;
    rec.sum_rate_mbps = to_mbps(ev.mean_sum_rate, bw);
    rec.pct5_mbps = to_mbps(ev.mean_pct5, bw);
    rec.score = to_mbps(ev.mean_score, bw);
    result.epochs.push_back(rec);

    if (rec.score > best_score) {
      best_score = rec.score;
      result.best_epoch = rec.epoch;
      result.best_net = online;
      if (!ckpt_dir.empty()) save_checkpoint(online, adam.step, config.adam, (fs::path(output.dir) / "best.ckpt").string());
    }
    if (!ckpt_dir.empty()) {
      save_checkpoint(online, adam.step, config.adam, (ckpt_dir / epoch_file(rec.epoch)).string());
      std::ofstream log(fs::path(output.dir) / "training_log.csv");
      log << training_log_csv(result.epochs);
    }
    if (output.on_epoch) output.on_epoch(rec);
  }

  result.final_net = online;
  result.adam_step = adam.step;
  return result;
}

}  // namespace rrm
