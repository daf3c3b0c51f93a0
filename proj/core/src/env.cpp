#include "rrm/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace rrm {

namespace {

// Redraws allowed when unsorted observations need equally sized pools.
constexpr int kMaxBalancedDraws = 5'000;

}  // namespace

double EnvConfig::noise_w() const {
  return dbm_to_watts(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

std::vector<double> EnvConfig::power_levels_w() const {
  std::vector<double> out(power_levels);
  for (int l = 0; l < power_levels; ++l) {
    const double below =
        power_levels == 1 ? 0.0 : power_range_db * (power_levels - 1 - l) / (power_levels - 1);
    out[l] = dbm_to_watts(p_max_dbm - below);
  }
  return out;
}

void EnvConfig::validate() const {
  deployment.validate();
  channel.path_loss.validate();
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("EnvConfig: ") + what);
  };
  require(episode_length >= 1, "episode_length must be >= 1");
  require(top_k >= 1, "top_k must be >= 1");
  require(num_remote >= 0, "num_remote must be >= 0");
  require(power_levels >= 1, "power_levels must be >= 1");
  require(feedback_period >= 1, "feedback_period must be >= 1");
  require(feedback_delay >= 0 && backhaul_delay >= 0, "delays must be >= 0");
  require(reward_exponent >= 0.0 && reward_exponent <= 1.0, "reward_exponent must be in [0,1]");
  require(link.alpha_rate > 0.0 && link.alpha_rate < 1.0, "alpha_rate must be in (0,1)");
  require(link.alpha_interference > 0.0 && link.alpha_interference < 1.0,
          "alpha_interference must be in (0,1)");
  require(link.rate_floor > 0.0, "rate_floor must be positive");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(channel.num_sinusoids >= 1, "num_sinusoids must be >= 1");
  if (!sort_by_pf)
    require(deployment.num_ues == deployment.num_aps * top_k,
            "unsorted observations need num_ues == num_aps * top_k");
}

void to_json(nlohmann::json& j, const EnvConfig& c) {
  j = {{"deployment", c.deployment},
       {"channel",
        {{"k0_db", c.channel.path_loss.k0_db},
         {"alpha1", c.channel.path_loss.alpha1},
         {"alpha2", c.channel.path_loss.alpha2},
         {"d_bp_m", c.channel.path_loss.d_bp},
         {"shadow_std_db", c.channel.shadow_std_db},
         {"carrier_hz", c.channel.carrier_hz},
         {"speed_mps", c.channel.speed_mps},
         {"interval_s", c.channel.interval_s},
         {"num_sinusoids", c.channel.num_sinusoids}}},
       {"alpha_rate", c.link.alpha_rate},
       {"alpha_interference", c.link.alpha_interference},
       {"rate_floor", c.link.rate_floor},
       {"episode_length", c.episode_length},
       {"top_k", c.top_k},
       {"num_remote", c.num_remote},
       {"power_levels", c.power_levels},
       {"power_range_db", c.power_range_db},
       {"feedback_period", c.feedback_period},
       {"feedback_delay", c.feedback_delay},
       {"backhaul_delay", c.backhaul_delay},
       {"reward_exponent", c.reward_exponent},
       {"sort_by_pf", c.sort_by_pf},
       {"default_weight", c.default_weight},
       {"default_sinr_db", c.default_sinr_db},
       {"p_max_dbm", c.p_max_dbm},
       {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
       {"bandwidth_hz", c.bandwidth_hz}};
}

void from_json(const nlohmann::json& j, EnvConfig& c) {
  const EnvConfig d;
  c = d;
  if (j.contains("deployment")) c.deployment = j.at("deployment").get<DeploymentConfig>();
  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    c.channel.path_loss.k0_db = ch.value("k0_db", d.channel.path_loss.k0_db);
    c.channel.path_loss.alpha1 = ch.value("alpha1", d.channel.path_loss.alpha1);
    c.channel.path_loss.alpha2 = ch.value("alpha2", d.channel.path_loss.alpha2);
    c.channel.path_loss.d_bp = ch.value("d_bp_m", d.channel.path_loss.d_bp);
    c.channel.shadow_std_db = ch.value("shadow_std_db", d.channel.shadow_std_db);
    c.channel.carrier_hz = ch.value("carrier_hz", d.channel.carrier_hz);
    c.channel.speed_mps = ch.value("speed_mps", d.channel.speed_mps);
    c.channel.interval_s = ch.value("interval_s", d.channel.interval_s);
    c.channel.num_sinusoids = ch.value("num_sinusoids", d.channel.num_sinusoids);
  }
  c.link.alpha_rate = j.value("alpha_rate", d.link.alpha_rate);
  c.link.alpha_interference = j.value("alpha_interference", d.link.alpha_interference);
  c.link.rate_floor = j.value("rate_floor", d.link.rate_floor);
  c.episode_length = j.value("episode_length", d.episode_length);
  c.top_k = j.value("top_k", d.top_k);
  c.num_remote = j.value("num_remote", d.num_remote);
  c.power_levels = j.value("power_levels", d.power_levels);
  c.power_range_db = j.value("power_range_db", d.power_range_db);
  c.feedback_period = j.value("feedback_period", d.feedback_period);
  c.feedback_delay = j.value("feedback_delay", d.feedback_delay);
  c.backhaul_delay = j.value("backhaul_delay", d.backhaul_delay);
  c.reward_exponent = j.value("reward_exponent", d.reward_exponent);
  c.sort_by_pf = j.value("sort_by_pf", d.sort_by_pf);
  c.default_weight = j.value("default_weight", d.default_weight);
  c.default_sinr_db = j.value("default_sinr_db", d.default_sinr_db);
  c.p_max_dbm = j.value("p_max_dbm", d.p_max_dbm);
  c.noise_psd_dbm_hz = j.value("noise_psd_dbm_hz", d.noise_psd_dbm_hz);
  c.bandwidth_hz = j.value("bandwidth_hz", d.bandwidth_hz);
}

DecodedAction decode_action(int action, const Observation& local_obs, const EnvConfig& config) {
  const int k = config.top_k;
  if (action < 0 || action > config.power_levels * k)
    throw ActionOutOfRange("action " + std::to_string(action) + " outside [0, " +
                           std::to_string(config.power_levels * k) + "]");
  DecodedAction out;
  if (action == 0) return out;
  out.level = (action - 1) / k;
  out.slot = (action - 1) % k;
  const int ue = local_obs.slots.at(out.slot).ue;
  if (ue < 0) {
    out.invalid = true;
    return out;
  }
  out.decision = ScheduleDecision::serve(ue, config.power_levels_w()[out.level]);
  return out;
}

std::vector<double> compute_reward(std::span<const ScheduleDecision> decisions,
                                   std::span<const double> served_rates,
                                   std::span<const double> served_weights, double reward_exponent,
                                   std::span<const char> invalid, std::span<const double> top_pf) {
  const std::size_t n = decisions.size();
  if (served_rates.size() != n || served_weights.size() != n || invalid.size() != n ||
      top_pf.size() != n)
    throw ShapeMismatch("compute_reward: per-agent inputs differ in length");

  std::vector<double> reward(n, 0.0);
  bool any_on = false;
  double base = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!decisions[i].serving()) continue;
    any_on = true;
    base += std::pow(served_weights[i], reward_exponent) * served_rates[i];
  }
  if (any_on) {
    std::fill(reward.begin(), reward.end(), base);
  } else if (n > 0) {
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (top_pf[i] > top_pf[top]) top = i;
    reward[top] = -top_pf[top];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (invalid[i]) reward[i] = 0.0;
  return reward;
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  levels_w_ = config_.power_levels_w();
  noise_w_ = config_.noise_w();
  p_max_w_ = config_.p_max_w();
}

std::vector<Observation> Environment::reset(std::uint64_t seed) {
  seed_ = seed;
  Rng rng(seed);
  for (int draw = 0;; ++draw) {
    deployment_ = generate_deployment(config_.deployment, rng);
    long_term_ = draw_long_term_gains(deployment_, config_.channel.path_loss,
                                      config_.channel.shadow_std_db, rng);
    deployment_.association = associate_max_rsrp(long_term_.power());
    if (config_.sort_by_pf) break;
    const auto pools = deployment_.pools();
    const bool balanced = std::all_of(pools.begin(), pools.end(), [&](const auto& p) {
      return static_cast<int>(p.size()) == config_.top_k;
    });
    if (balanced) break;
    if (draw + 1 >= kMaxBalancedDraws)
      throw PlacementInfeasible("no deployment with equally sized pools found");
  }
  check_partition(deployment_.association, deployment_.num_aps());
  deployment_.remote_agents = nearest_remote_agents(deployment_.ap_positions, config_.num_remote);
  fading_ = FadingProcess(deployment_.num_ues(), deployment_.num_aps(),
                          config_.channel.doppler_hz(), config_.channel.interval_s,
                          config_.channel.num_sinusoids, rng);

  stats_.assign(deployment_.num_ues(), LinkStats{config_.link.rate_floor, 0.0});
  rate_sum_.assign(deployment_.num_ues(), 0.0);
  reports_.clear();
  advance_to(1);
  return obs_;
}

void Environment::advance_to(long t) {
  t_ = t;
  if (!done()) {
    gains_t_ = power_gains_at(long_term_, fading_, t_);
    maybe_generate_reports();
  }
  obs_ = build_observations();
}

void Environment::maybe_generate_reports() {
  if (t_ % config_.feedback_period != 0) return;
  ReportBatch batch;
  batch.t_measured = t_;
  const int k = num_ues();
  batch.weight.resize(k);
  batch.sinr.resize(k);
  for (int j = 0; j < k; ++j) {
    const int server = deployment_.association[j];
    batch.weight[j] = stats_[j].weight(config_.link.rate_floor);
    batch.sinr[j] = measured_sinr(gains_t_(j, server), p_max_w_, stats_[j].avg_interference, noise_w_);
  }
  reports_.push_back(std::move(batch));
  // Keep only what the most delayed view can still need.
  const long remote_delay = config_.feedback_delay + config_.backhaul_delay;
  while (reports_.size() > 1 && reports_[1].t_measured + remote_delay <= t_) reports_.pop_front();
}

const Environment::ReportBatch* Environment::visible_batch(long delay) const {
  for (auto it = reports_.rbegin(); it != reports_.rend(); ++it)
    if (it->t_measured + delay <= t_) return &*it;
  return nullptr;
}

std::vector<std::vector<UeView>> Environment::views_with_delay(long delay) const {
  const ReportBatch* batch = visible_batch(delay);
  const double default_sinr = db_to_linear(config_.default_sinr_db);
  std::vector<std::vector<UeView>> views(num_agents());
  for (int j = 0; j < num_ues(); ++j) {
    UeView v;
    v.ue = j;
    if (batch) {
      v.weight = batch->weight[j];
      v.sinr = batch->sinr[j];
      v.t_measured = static_cast<int>(batch->t_measured);
    } else {
      v.weight = config_.default_weight;
      v.sinr = default_sinr;
    }
    views[deployment_.association[j]].push_back(v);
  }
  return views;
}

std::vector<std::vector<UeView>> Environment::local_views() const {
  return views_with_delay(config_.feedback_delay);
}

std::vector<std::vector<UeView>> Environment::true_views() const {
  std::vector<std::vector<UeView>> views(num_agents());
  for (int j = 0; j < num_ues(); ++j) {
    const int server = deployment_.association[j];
    UeView v;
    v.ue = j;
    v.weight = stats_[j].weight(config_.link.rate_floor);
    v.sinr = measured_sinr(gains_t_(j, server), p_max_w_, stats_[j].avg_interference, noise_w_);
    v.t_measured = static_cast<int>(t_);
    views[server].push_back(v);
  }
  return views;
}

double Environment::visible_weight(int ue) const {
  const ReportBatch* batch = visible_batch(config_.feedback_delay);
  return batch ? batch->weight[ue] : config_.default_weight;
}

std::vector<Observation> Environment::build_observations() const {
  const int k = config_.top_k;
  const int n = config_.num_remote;
  const auto local = views_with_delay(config_.feedback_delay);
  const auto remote = views_with_delay(config_.feedback_delay + config_.backhaul_delay);

  auto ranked = [&](std::vector<UeView> pool) {
    if (config_.sort_by_pf)
      std::stable_sort(pool.begin(), pool.end(),
                       [](const UeView& a, const UeView& b) { return a.pf() > b.pf(); });
    if (static_cast<int>(pool.size()) > k) pool.resize(k);
    return pool;
  };
  std::vector<std::vector<UeView>> top_local(num_agents()), top_remote(num_agents());
  for (int i = 0; i < num_agents(); ++i) {
    top_local[i] = ranked(local[i]);
    top_remote[i] = ranked(remote[i]);
  }

  std::vector<Observation> out(num_agents());
  for (int i = 0; i < num_agents(); ++i) {
    Observation& obs = out[i];
    obs.values.assign(config_.observation_size(), 0.0);
    obs.slots.assign((n + 1) * k, SlotTag{});
    obs.pf.assign((n + 1) * k, 0.0);
    for (int s = 0; s < (n + 1) * k; ++s) {
      obs.values[2 * s] = config_.default_weight;
      obs.values[2 * s + 1] = config_.default_sinr_db;
    }
    auto fill = [&](int block, const std::vector<UeView>& ues) {
      for (int s = 0; s < static_cast<int>(ues.size()); ++s) {
        const int slot = block * k + s;
        const UeView& v = ues[s];
        obs.slots[slot] = {v.ue, v.t_measured};
        if (v.t_measured >= 0) {
          obs.values[2 * slot] = v.weight;
          obs.values[2 * slot + 1] = linear_to_db(v.sinr);
        }
        obs.pf[slot] = v.pf();
      }
    };
    fill(0, top_local[i]);
    const auto& remotes = deployment_.remote_agents[i];
    for (int r = 0; r < static_cast<int>(remotes.size()); ++r) fill(r + 1, top_remote[remotes[r]]);
  }
  return out;
}

StepResult Environment::step(std::span<const int> actions) {
  if (done()) throw EpisodeFinished("step() after the final interval; call reset()");
  if (static_cast<int>(actions.size()) != num_agents())
    throw ShapeMismatch("step: expected one action per agent");
  std::vector<ScheduleDecision> decisions(num_agents());
  std::vector<char> invalid(num_agents(), 0);
  for (int i = 0; i < num_agents(); ++i) {
    const DecodedAction d = decode_action(actions[i], obs_[i], config_);
    decisions[i] = d.decision;
    invalid[i] = d.invalid ? 1 : 0;
  }
  return finish_step(std::move(decisions), std::move(invalid),
                     std::vector<int>(actions.begin(), actions.end()));
}

StepResult Environment::step_decisions(std::span<const ScheduleDecision> decisions) {
  if (done()) throw EpisodeFinished("step_decisions() after the final interval; call reset()");
  if (static_cast<int>(decisions.size()) != num_agents())
    throw ShapeMismatch("step_decisions: expected one decision per agent");
  for (int i = 0; i < num_agents(); ++i) {
    const auto& d = decisions[i];
    if (!d.serving()) continue;
    if (d.ue >= num_ues() || deployment_.association[d.ue] != i)
      throw std::invalid_argument("step_decisions: AP serves a UE outside its pool");
    if (!(d.power_w > 0.0) || d.power_w > p_max_w_ * (1.0 + 1e-12))
      throw std::invalid_argument("step_decisions: transmit power outside (0, P_max]");
  }
  return finish_step(std::vector<ScheduleDecision>(decisions.begin(), decisions.end()),
                     std::vector<char>(num_agents(), 0), {});
}

StepResult Environment::finish_step(std::vector<ScheduleDecision> decisions,
                                    std::vector<char> invalid, std::vector<int> actions) {
  const int num_aps = num_agents();
  const RateResult rates =
      compute_rates(decisions, gains_t_, deployment_.association, noise_w_);

  std::vector<double> served_rates(num_aps, 0.0), served_weights(num_aps, 0.0),
      top_pf(num_aps, 0.0);
  for (int i = 0; i < num_aps; ++i) {
    if (decisions[i].serving()) {
      served_rates[i] = rates.rate[decisions[i].ue];
      served_weights[i] = visible_weight(decisions[i].ue);
    }
    top_pf[i] = obs_[i].slots[0].ue >= 0 ? obs_[i].pf[0] : 0.0;
  }

  StepResult result;
  result.rewards = compute_reward(decisions, served_rates, served_weights,
                                  config_.reward_exponent, invalid, top_pf);

  for (int j = 0; j < num_ues(); ++j) {
    rate_sum_[j] += rates.rate[j];
    stats_[j] = update_link_stats(stats_[j], rates.rate[j], rates.interference[j], config_.link);
  }

  result.info.t = t_;
  result.info.actions = std::move(actions);
  result.info.decisions = std::move(decisions);
  result.info.invalid = std::move(invalid);
  result.info.ue_rates = rates.rate;
  result.info.served_rates = std::move(served_rates);

  advance_to(t_ + 1);
  result.done = done();
  result.observations = obs_;
  return result;
}

std::vector<double> Environment::episode_average_rates() const {
  const long steps = std::min<long>(t_ - 1, config_.episode_length);
  std::vector<double> out(rate_sum_.size(), 0.0);
  if (steps <= 0) return out;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = rate_sum_[j] / static_cast<double>(steps);
  return out;
}

}  // namespace rrm
