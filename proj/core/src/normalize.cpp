#include "rrm/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

ObservationDataset collect_offline_dataset(const EnvConfig& config,
                                           std::span<const BaselineKind> baselines,
                                           int num_episodes, std::uint64_t seed) {
  if (baselines.empty()) throw std::invalid_argument("collect_offline_dataset: no baseline given");
  if (num_episodes < 1) throw std::invalid_argument("collect_offline_dataset: num_episodes < 1");

  ObservationDataset data;
  Environment env(config);
  auto record_obs = [&](const std::vector<Observation>& obs) {
    for (const auto& o : obs)
      for (std::size_t s = 0; s < o.slots.size(); ++s) {
        if (o.slots[s].ue < 0 || o.slots[s].t_measured < 0) continue;
        data.weights.push_back(o.weight(static_cast<int>(s)));
        data.sinr_db.push_back(o.sinr_db(static_cast<int>(s)));
      }
  };

  for (int e = 0; e < num_episodes; ++e) {
    const BaselineKind& kind = baselines[e % baselines.size()];
    record_obs(env.reset(derive_seed(seed, static_cast<std::uint64_t>(e))));
    while (!env.done()) {
      const auto decisions = baseline_decide(kind, env);
      StepResult r = env.step_decisions(decisions);
      data.rewards.insert(data.rewards.end(), r.rewards.begin(), r.rewards.end());
      if (!r.done) record_obs(r.observations);
    }
  }
  return data;
}

double quantile_linear(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double map_observation(double v, std::span<const double> thresholds) {
  const auto q = static_cast<double>(thresholds.size());
  const auto idx = std::upper_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin();
  return static_cast<double>(idx) / q - 0.5;
}

std::vector<double> PercentileMapper::map(std::span<const double> raw) const {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = map_observation(raw[i], i % 2 == 0 ? weight_thresholds : sinr_db_thresholds);
  return out;
}

namespace {

std::vector<double> thresholds_for(std::vector<double> values, int levels, const char* what) {
  if (values.empty())
    throw DegenerateDataset(std::string("no ") + what + " samples collected");
  std::sort(values.begin(), values.end());
  if (values.front() == values.back())
    throw DegenerateDataset(std::string("all ") + what + " samples are equal");
  std::vector<double> th(levels);
  for (int q = 0; q < levels; ++q)
    th[q] = quantile_linear(values, static_cast<double>(q) / (levels - 1));
  th.front() = values.front();
  th.back() = values.back();
  return th;
}

}  // namespace

NormalizationStats fit(const ObservationDataset& dataset, int levels) {
  if (levels < 2) throw std::invalid_argument("fit: need at least 2 percentile levels");
  NormalizationStats s;
  s.mapper.levels = levels;
  s.mapper.weight_thresholds = thresholds_for(dataset.weights, levels, "weight");
  s.mapper.sinr_db_thresholds = thresholds_for(dataset.sinr_db, levels, "SINR");

  const auto& r = dataset.rewards;
  if (r.size() < 2) throw DegenerateDataset("fewer than two reward samples");
  const double n = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateDataset("reward samples have zero spread");
  s.reward = {mean, sd};
  return s;
}

std::string config_fingerprint(const EnvConfig& config) {
  nlohmann::json j = config;
  return fingerprint(j.dump());
}

void to_json(nlohmann::json& j, const NormalizationStats& s) {
  j = {{"Q", s.mapper.levels},
       {"weight_thresholds", s.mapper.weight_thresholds},
       {"sinr_db_thresholds", s.mapper.sinr_db_thresholds},
       {"mu_rew", s.reward.mean},
       {"sigma_rew", s.reward.stddev},
       {"config_fingerprint", s.config_fingerprint}};
}

void from_json(const nlohmann::json& j, NormalizationStats& s) {
  s.mapper.levels = j.at("Q").get<int>();
  s.mapper.weight_thresholds = j.at("weight_thresholds").get<std::vector<double>>();
  s.mapper.sinr_db_thresholds = j.at("sinr_db_thresholds").get<std::vector<double>>();
  s.reward.mean = j.at("mu_rew").get<double>();
  s.reward.stddev = j.at("sigma_rew").get<double>();
  s.config_fingerprint = j.value("config_fingerprint", std::string{});
  if (static_cast<int>(s.mapper.weight_thresholds.size()) != s.mapper.levels ||
      static_cast<int>(s.mapper.sinr_db_thresholds.size()) != s.mapper.levels)
    throw std::invalid_argument("normalization stats: threshold count differs from Q");
  if (!(s.reward.stddev > 0.0)) throw std::invalid_argument("normalization stats: sigma_rew <= 0");
}

NormalizationStats load_normalization(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in).get<NormalizationStats>();
}

void save_normalization(const NormalizationStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << nlohmann::json(stats).dump(2) << '\n';
}

}  // namespace rrm
