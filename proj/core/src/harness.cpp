#include "rrm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

double fifth_percentile(std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("fifth_percentile of no rates");
  std::vector<double> sorted(rates.begin(), rates.end());
  const std::size_t idx = sorted.size() / 20;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(idx), sorted.end());
  return sorted[idx];
}

EpisodeMetrics episode_metrics(std::span<const double> ue_rates) {
  EpisodeMetrics m;
  m.ue_rates.assign(ue_rates.begin(), ue_rates.end());
  m.sum_rate = std::accumulate(ue_rates.begin(), ue_rates.end(), 0.0);
  m.pct5_rate = fifth_percentile(ue_rates);
  m.score = m.sum_rate / static_cast<double>(ue_rates.size()) + 3.0 * m.pct5_rate;
  return m;
}

bool dominates(double a_sum, double a_pct5, double b_sum, double b_pct5) {
  return a_sum >= b_sum && a_pct5 >= b_pct5 && (a_sum > b_sum || a_pct5 > b_pct5);
}

// ---------------------------------------------------------------- policies

std::string policy_name(const Policy& policy) {
  struct {
    std::string operator()(const BaselineKind& k) const { return k.name(); }
    std::string operator()(const AgentPolicy& p) const {
      return p.epsilon > 0.0 ? "agent_eps" : "agent";
    }
    std::string operator()(const RandomPolicy&) const { return "random"; }
  } visitor;
  return std::visit(visitor, policy);
}

Eigen::MatrixXd mapped_observations(const std::vector<Observation>& obs,
                                    const PercentileMapper& mapper) {
  if (obs.empty()) return {};
  const auto d = static_cast<Eigen::Index>(obs.front().values.size());
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto mapped = mapper.map(obs[i].values);
    out.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(mapped.data(), d);
  }
  return out;
}

std::vector<int> select_actions(const Mlp* net, const Eigen::MatrixXd& mapped_obs, double epsilon,
                                int num_actions, Rng& rng) {
  const auto n = static_cast<int>(mapped_obs.cols());
  std::vector<int> actions(n, 0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, num_actions - 1);

  std::vector<char> explore(n, 0);
  bool need_net = false;
  for (int i = 0; i < n; ++i) {
    explore[i] = epsilon >= 1.0 || coin(rng) < epsilon;
    if (explore[i])
      actions[i] = any(rng);
    else
      need_net = true;
  }
  if (!need_net) return actions;
  if (net == nullptr) throw std::invalid_argument("select_actions: greedy choice without a network");
  if (net->shape().outputs != num_actions)
    throw ShapeMismatch("select_actions: network outputs differ from the action count");
  const Eigen::MatrixXd q = net->forward(mapped_obs);
  for (int i = 0; i < n; ++i) {
    if (explore[i]) continue;
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.rows(); ++a)
      if (q(a, i) > q(best, i)) best = a;
    actions[i] = static_cast<int>(best);
  }
  return actions;
}

EpisodeMetrics run_episode(const Policy& policy, const EnvConfig& config, std::uint64_t env_seed,
                           std::uint64_t policy_seed, const StepObserver& observer) {
  Environment env(config);
  std::vector<Observation> obs = env.reset(env_seed);
  Rng rng(policy_seed);

  while (!env.done()) {
    StepResult r;
    if (const auto* kind = std::get_if<BaselineKind>(&policy)) {
      r = env.step_decisions(baseline_decide(*kind, env));
    } else if (const auto* agent = std::get_if<AgentPolicy>(&policy)) {
      const auto actions = select_actions(agent->net, mapped_observations(obs, agent->mapper),
                                          agent->epsilon, config.num_actions(), rng);
      r = env.step(actions);
    } else {
      std::uniform_int_distribution<int> any(0, config.num_actions() - 1);
      std::vector<int> actions(env.num_agents());
      for (auto& a : actions) a = any(rng);
      r = env.step(actions);
    }
    if (observer) observer(env, obs, r);
    obs = std::move(r.observations);
  }
  return episode_metrics(env.episode_average_rates());
}

// ---------------------------------------------------------------- environment sets

std::vector<std::uint64_t> EnvironmentSet::seeds() const {
  std::vector<std::uint64_t> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.seed);
  return out;
}

namespace {

nlohmann::json metrics_json(const EpisodeMetrics& m) {
  return {{"sum_rate", m.sum_rate}, {"pct5_rate", m.pct5_rate}, {"score", m.score},
          {"ue_rates", m.ue_rates}};
}

EpisodeMetrics metrics_from_json(const nlohmann::json& j) {
  EpisodeMetrics m;
  m.sum_rate = j.at("sum_rate");
  m.pct5_rate = j.at("pct5_rate");
  m.score = j.at("score");
  m.ue_rates = j.value("ue_rates", std::vector<double>{});
  return m;
}

Deployment deployment_for(const EnvConfig& config, std::uint64_t seed) {
  Environment env(config);
  env.reset(seed);
  return env.deployment();
}

double rel_gap(double x, double ref) {
  return ref == 0.0 ? (x == 0.0 ? 0.0 : INFINITY) : std::abs(x - ref) / std::abs(ref);
}

void mean_and_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void to_json(nlohmann::json& j, const EnvironmentSet& s) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : s.members) {
    nlohmann::json e = {{"seed", m.seed}, {"deployment", m.deployment}};
    if (m.full_reuse) e["full_reuse"] = metrics_json(*m.full_reuse);
    if (m.tdm) e["tdm"] = metrics_json(*m.tdm);
    members.push_back(std::move(e));
  }
  j = {{"config", s.config},
       {"config_fingerprint", s.config_fingerprint},
       {"tolerance", s.tolerance},
       {"reference",
        {{"full_reuse_sum", s.ref_full_reuse_sum},
         {"full_reuse_pct5", s.ref_full_reuse_pct5},
         {"tdm_sum", s.ref_tdm_sum},
         {"tdm_pct5", s.ref_tdm_pct5}}},
       {"members", std::move(members)}};
}

void from_json(const nlohmann::json& j, EnvironmentSet& s) {
  s.config = j.at("config").get<EnvConfig>();
  s.config_fingerprint = j.value("config_fingerprint", config_fingerprint(s.config));
  s.tolerance = j.value("tolerance", 0.0);
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    s.ref_full_reuse_sum = r.at("full_reuse_sum");
    s.ref_full_reuse_pct5 = r.at("full_reuse_pct5");
    s.ref_tdm_sum = r.at("tdm_sum");
    s.ref_tdm_pct5 = r.at("tdm_pct5");
  }
  s.members.clear();
  for (const auto& e : j.at("members")) {
    SetMember m;
    m.seed = e.at("seed").get<std::uint64_t>();
    if (e.contains("deployment")) m.deployment = e.at("deployment").get<Deployment>();
    if (e.contains("full_reuse")) m.full_reuse = metrics_from_json(e.at("full_reuse"));
    if (e.contains("tdm")) m.tdm = metrics_from_json(e.at("tdm"));
    s.members.push_back(std::move(m));
  }
}

EnvironmentSet load_environment_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in).get<EnvironmentSet>();
}

void save_environment_set(const EnvironmentSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << nlohmann::json(set).dump(2) << '\n';
}

EnvironmentSet make_environment_set(const EnvConfig& config, int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("make_environment_set: negative count");
  EnvironmentSet set;
  set.config = config;
  set.config_fingerprint = config_fingerprint(config);
  for (int i = 0; i < count; ++i) {
    SetMember m;
    m.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    m.deployment = deployment_for(config, m.seed);
    set.members.push_back(std::move(m));
  }
  return set;
}

bool within_band(const EnvironmentSet& set, const EpisodeMetrics& fr, const EpisodeMetrics& tdm) {
  const double tol = set.tolerance;
  return rel_gap(fr.sum_rate, set.ref_full_reuse_sum) < tol &&
         rel_gap(fr.pct5_rate, set.ref_full_reuse_pct5) < tol &&
         rel_gap(tdm.sum_rate, set.ref_tdm_sum) < tol &&
         rel_gap(tdm.pct5_rate, set.ref_tdm_pct5) < tol;
}

EnvironmentSet build_validation_set(const EnvConfig& config, const ValidationOptions& options,
                                    std::uint64_t seed) {
  if (options.target_count < 1 || options.population_size < 1 || options.tolerance < 0.0 ||
      options.max_candidates < 0)
    throw std::invalid_argument("build_validation_set: invalid options");
  const Policy fr = BaselineKind::full_reuse();
  const Policy tdm = BaselineKind::tdm();

  EnvironmentSet set;
  set.config = config;
  set.config_fingerprint = config_fingerprint(config);
  set.tolerance = options.tolerance;

  const Rng::result_type pop_base = derive_seed(seed, 0);
  const Rng::result_type cand_base = derive_seed(seed, 1);
  for (int p = 0; p < options.population_size; ++p) {
    const auto s = derive_seed(pop_base, static_cast<std::uint64_t>(p));
    const auto a = run_episode(fr, config, s, 0);
    const auto b = run_episode(tdm, config, s, 0);
    set.ref_full_reuse_sum += a.sum_rate;
    set.ref_full_reuse_pct5 += a.pct5_rate;
    set.ref_tdm_sum += b.sum_rate;
    set.ref_tdm_pct5 += b.pct5_rate;
  }
  const double n = options.population_size;
  set.ref_full_reuse_sum /= n;
  set.ref_full_reuse_pct5 /= n;
  set.ref_tdm_sum /= n;
  set.ref_tdm_pct5 /= n;

  for (int c = 0; c < options.max_candidates &&
                  static_cast<int>(set.members.size()) < options.target_count;
       ++c) {
    const auto s = derive_seed(cand_base, static_cast<std::uint64_t>(c));
    auto a = run_episode(fr, config, s, 0);
    auto b = run_episode(tdm, config, s, 0);
    if (!within_band(set, a, b)) continue;
    SetMember m;
    m.seed = s;
    m.deployment = deployment_for(config, s);
    m.full_reuse = std::move(a);
    m.tdm = std::move(b);
    set.members.push_back(std::move(m));
  }
  if (static_cast<int>(set.members.size()) < options.target_count)
    throw InsufficientCandidates("validation set: accepted " + std::to_string(set.members.size()) +
                                 " of " + std::to_string(options.target_count) + " after " +
                                 std::to_string(options.max_candidates) + " candidates");
  return set;
}

// ---------------------------------------------------------------- evaluation

Evaluation evaluate(const Policy& policy, const EnvConfig& config,
                    std::span<const std::uint64_t> env_seeds, std::uint64_t policy_seed) {
  Evaluation ev;
  ev.policy = policy_name(policy);
  std::vector<double> sums, pct5s, scores;
  for (std::size_t e = 0; e < env_seeds.size(); ++e) {
    auto m = run_episode(policy, config, env_seeds[e], derive_seed(policy_seed, e));
    sums.push_back(m.sum_rate);
    pct5s.push_back(m.pct5_rate);
    scores.push_back(m.score);
    ev.per_env.push_back(std::move(m));
  }
  mean_and_std(sums, ev.mean_sum_rate, ev.std_sum_rate);
  mean_and_std(pct5s, ev.mean_pct5, ev.std_pct5);
  mean_and_std(scores, ev.mean_score, ev.std_score);
  return ev;
}

SeedAggregate aggregate_over_seeds(std::span<const Evaluation> runs) {
  SeedAggregate agg;
  agg.seeds = static_cast<int>(runs.size());
  std::vector<double> sums, pct5s, scores;
  for (const auto& r : runs) {
    sums.push_back(r.mean_sum_rate);
    pct5s.push_back(r.mean_pct5);
    scores.push_back(r.mean_score);
  }
  mean_and_std(sums, agg.mean_sum_rate, agg.std_sum_rate);
  mean_and_std(pct5s, agg.mean_pct5, agg.std_pct5);
  mean_and_std(scores, agg.mean_score, agg.std_score);
  return agg;
}

void to_json(nlohmann::json& j, const Evaluation& e) {
  nlohmann::json per_env = nlohmann::json::array();
  for (const auto& m : e.per_env)
    per_env.push_back({{"sum_rate", m.sum_rate}, {"pct5_rate", m.pct5_rate}, {"score", m.score}});
  j = {{"policy", e.policy},
       {"sum_rate", {{"mean", e.mean_sum_rate}, {"std", e.std_sum_rate}}},
       {"pct5_rate", {{"mean", e.mean_pct5}, {"std", e.std_pct5}}},
       {"score", {{"mean", e.mean_score}, {"std", e.std_score}}},
       {"per_env", std::move(per_env)}};
}

// ---------------------------------------------------------------- analyses

std::vector<double> interference_profile(const EnvConfig& config, int max_interferers,
                                         int num_realizations, std::uint64_t seed) {
  const int n_aps = config.deployment.num_aps;
  if (max_interferers < 0 || max_interferers > n_aps - 1)
    throw std::invalid_argument("interference_profile: max_interferers out of range");
  if (num_realizations < 1) throw std::invalid_argument("interference_profile: no realizations");

  std::vector<double> sum_db(max_interferers + 1, 0.0);
  long samples = 0;
  Environment env(config);
  const double p = config.p_max_w();
  const double noise = config.noise_w();
  for (int r = 0; r < num_realizations; ++r) {
    env.reset(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const auto& dep = env.deployment();
    const auto order = nearest_remote_agents(dep.ap_positions, n_aps - 1);
    for (int j = 0; j < dep.num_ues(); ++j) {
      const int server = dep.association[j];
      const double signal = p * env.long_term().power(j, server);
      double interference = 0.0;
      for (int n = 0; n <= max_interferers; ++n) {
        if (n > 0) interference += p * env.long_term().power(j, order[server][n - 1]);
        sum_db[n] += linear_to_db(signal / (noise + interference));
      }
      ++samples;
    }
  }
  for (auto& v : sum_db) v /= static_cast<double>(samples);
  return sum_db;
}

long export_decision_log(const Policy& policy, const EnvConfig& config,
                         std::span<const std::uint64_t> env_seeds, std::ostream& out) {
  const int k = config.top_k;
  out << "env_seed,t,ap,top_weight,top_sinr_db";
  for (int s = 0; s < k; ++s) out << ",local_pf" << s + 1;
  for (int r = 0; r < config.num_remote; ++r) out << ",remote" << r + 1 << "_top_pf";
  out << ",action,serve,ue\n";

  long rows = 0;
  for (std::size_t e = 0; e < env_seeds.size(); ++e) {
    const auto seed = env_seeds[e];
    auto log = [&](const Environment&, const std::vector<Observation>& obs, const StepResult& r) {
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto& o = obs[i];
        out << seed << ',' << r.info.t << ',' << i << ',' << o.weight(0) << ',' << o.sinr_db(0);
        for (int s = 0; s < k; ++s) out << ',' << o.pf[s];
        for (int b = 1; b <= config.num_remote; ++b) out << ',' << o.pf[b * k];
        const int action = r.info.actions.empty() ? -1 : r.info.actions[i];
        const auto& d = r.info.decisions[i];
        out << ',' << action << ',' << (d.serving() ? 1 : 0) << ',' << d.ue << '\n';
        ++rows;
      }
    };
    run_episode(policy, config, seed, derive_seed(seed, e), log);
  }
  return rows;
}

long export_episode_trace(const Policy& policy, const EnvConfig& config, std::uint64_t env_seed,
                          std::ostream& out) {
  out << "t,ap,action,ue,power_dbm,rate_bpshz,reward\n";
  long rows = 0;
  auto trace = [&](const Environment&, const std::vector<Observation>&, const StepResult& r) {
    for (std::size_t i = 0; i < r.info.decisions.size(); ++i) {
      const auto& d = r.info.decisions[i];
      const int action = r.info.actions.empty() ? -1 : r.info.actions[i];
      out << r.info.t << ',' << i << ',' << action << ',' << d.ue << ',';
      if (d.serving())
        out << watts_to_dbm(d.power_w);
      else
        out << "off";
      out << ',' << r.info.served_rates[i] << ',' << r.rewards[i] << '\n';
      ++rows;
    }
  };
  run_episode(policy, config, env_seed, 0, trace);
  return rows;
}

}  // namespace rrm
