#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rrm/harness.hpp"
#include "test_support.hpp"

using namespace rrm;

namespace {

// Largest R such that at least 95% of the UEs have rate >= R, scanning
// every candidate value.
double brute_pct5(const std::vector<double>& r) {
  double best = -1.0;
  for (double cand : r) {
    const auto n = std::count_if(r.begin(), r.end(), [&](double x) { return x >= cand; });
    if (20 * n >= 19 * static_cast<long>(r.size())) best = std::max(best, cand);
  }
  return best;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("fifth percentile on worked examples") {
  std::vector<double> k20(20);
  std::iota(k20.begin(), k20.end(), 0.0);
  CHECK(fifth_percentile(k20) == 1.0);
  std::vector<double> k40(40);
  std::iota(k40.begin(), k40.end(), 0.0);
  std::reverse(k40.begin(), k40.end());
  CHECK(fifth_percentile(k40) == 2.0);
  std::vector<double> k24(24);
  std::iota(k24.begin(), k24.end(), 10.0);
  CHECK(fifth_percentile(k24) == 11.0);
  const std::vector<double> flat(24, 0.5);
  CHECK(fifth_percentile(flat) == 0.5);
}

TEST_CASE("fifth percentile equals the threshold definition") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> r(1 + rng() % 80);
    for (auto& x : r) x = std::round(u(rng) * 3.0) / 3.0;  // with ties
    CAPTURE(r.size());
    CHECK(fifth_percentile(r) == brute_pct5(r));
  }
}

TEST_CASE("score combines mean rate and three times the fifth percentile") {
  std::vector<double> r(24);
  for (int j = 0; j < 24; ++j) r[j] = 0.1 * (j + 1);
  const auto m = episode_metrics(r);
  CHECK(m.sum_rate == doctest::Approx(0.1 * 300.0));
  CHECK(m.pct5_rate == doctest::Approx(0.2));
  CHECK(m.score == doctest::Approx(30.0 / 24.0 + 0.6));
  CHECK(to_mbps(2.5, 10e6) == 25.0);
}

TEST_CASE("Pareto dominance") {
  CHECK(dominates(2.0, 1.0, 1.0, 1.0));
  CHECK(dominates(1.0, 2.0, 1.0, 1.0));
  CHECK_FALSE(dominates(1.0, 1.0, 1.0, 1.0));
  CHECK_FALSE(dominates(2.0, 0.5, 1.0, 1.0));
  CHECK_FALSE(dominates(1.0, 1.0, 2.0, 2.0));
}

TEST_CASE("evaluation is reproducible and its spread uses n - 1") {
  const auto cfg = testing::small_env(3, 9, 60);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  const auto a = evaluate(RandomPolicy{}, cfg, seeds, 9);
  const auto b = evaluate(RandomPolicy{}, cfg, seeds, 9);
  CHECK(a.mean_score == b.mean_score);
  CHECK(a.per_env.size() == 4);
  std::vector<double> scores, sums;
  for (const auto& m : a.per_env) {
    scores.push_back(m.score);
    sums.push_back(m.sum_rate);
  }
  CHECK(a.mean_score == doctest::Approx(testing::sample_mean(scores)));
  CHECK(a.std_score == doctest::Approx(testing::sample_std(scores)));
  CHECK(a.mean_sum_rate == doctest::Approx(testing::sample_mean(sums)));
  // A baseline rollout does not depend on the policy seed.
  const auto f1 = evaluate(BaselineKind::full_reuse(), cfg, seeds, 1);
  const auto f2 = evaluate(BaselineKind::full_reuse(), cfg, seeds, 2);
  CHECK(f1.mean_score == f2.mean_score);
  CHECK(a.policy == "random");
  CHECK(f1.policy == "full_reuse");
}

TEST_CASE("aggregation across trained models") {
  Evaluation a, b;
  a.mean_score = 1.0;
  b.mean_score = 3.0;
  a.mean_sum_rate = 10.0;
  b.mean_sum_rate = 14.0;
  const std::vector<Evaluation> runs{a, b};
  const auto s = aggregate_over_seeds(runs);
  CHECK(s.seeds == 2);
  CHECK(s.mean_score == 2.0);
  CHECK(s.std_score == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.mean_sum_rate == 12.0);
  CHECK(s.std_sum_rate == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("environment sets persist and replay their deployments") {
  const auto cfg = testing::small_env(4, 24, 50);
  const auto set = make_environment_set(cfg, 5, 77);
  REQUIRE(set.members.size() == 5);
  const auto seeds = set.seeds();
  CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 5);
  const auto path = (std::filesystem::temp_directory_path() / "rrm_envset.json").string();
  save_environment_set(set, path);
  const auto back = load_environment_set(path);
  std::filesystem::remove(path);
  CHECK(back.seeds() == set.seeds());
  CHECK(back.config_fingerprint == set.config_fingerprint);
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    Environment env(back.config);
    env.reset(back.members[i].seed);
    CHECK(env.deployment().association == set.members[i].deployment.association);
    CHECK(env.deployment().association == back.members[i].deployment.association);
  }
  CHECK(make_environment_set(cfg, 5, 77).seeds() == set.seeds());
}

TEST_CASE("validation set members sit inside the band around the population") {
  const auto cfg = testing::small_env(4, 24, 100);
  ValidationOptions opt;
  const auto set = build_validation_set(cfg, opt, 11);
  REQUIRE(set.members.size() == 10);
  CHECK(set.tolerance == 0.05);
  for (const auto& m : set.members) {
    REQUIRE(m.full_reuse.has_value());
    REQUIRE(m.tdm.has_value());
    // Re-run the baselines from scratch and compare to the stored means.
    const auto fr = run_episode(BaselineKind::full_reuse(), cfg, m.seed, 0);
    const auto tdm = run_episode(BaselineKind::tdm(), cfg, m.seed, 0);
    CHECK(fr.sum_rate == m.full_reuse->sum_rate);
    CHECK(testing::rel_err(fr.sum_rate, set.ref_full_reuse_sum) < 0.05);
    CHECK(testing::rel_err(fr.pct5_rate, set.ref_full_reuse_pct5) < 0.05);
    CHECK(testing::rel_err(tdm.sum_rate, set.ref_tdm_sum) < 0.05);
    CHECK(testing::rel_err(tdm.pct5_rate, set.ref_tdm_pct5) < 0.05);
    CHECK(within_band(set, fr, tdm));
  }
}

TEST_CASE("a zero tolerance leaves no acceptable candidates") {
  const auto cfg = testing::small_env(2, 4, 20);
  ValidationOptions opt;
  opt.tolerance = 0.0;
  opt.population_size = 10;
  opt.max_candidates = 30;
  CHECK_THROWS_AS(build_validation_set(cfg, opt, 1), InsufficientCandidates);
}

TEST_CASE("interference profile falls as more interferers are counted") {
  const auto prof = interference_profile(EnvConfig{}, 3, 20, 5);
  REQUIRE(prof.size() == 4);
  for (std::size_t n = 1; n < prof.size(); ++n) CHECK(prof[n] <= prof[n - 1]);
  CHECK(*std::max_element(prof.begin(), prof.end()) == prof[0]);
  CHECK(interference_profile(EnvConfig{}, 3, 20, 5) == prof);
}

TEST_CASE("decision log has one row per agent-interval") {
  const auto cfg = testing::small_env(3, 9, 40);
  const std::vector<std::uint64_t> seeds{4, 5};
  std::ostringstream out;
  const long rows = export_decision_log(BaselineKind::itlinq(), cfg, seeds, out);
  CHECK(rows == 3 * 40 * 2);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  const auto cols = split(header);
  CHECK(cols.front() == "env_seed");
  const auto action_col = std::find(cols.begin(), cols.end(), "action") - cols.begin();
  long seen = 0;
  for (std::string line; std::getline(in, line); ++seen) {
    const auto f = split(line);
    REQUIRE(f.size() == cols.size());
    CHECK(f[action_col] == "-1");
  }
  CHECK(seen == rows);

  Rng rng(3);
  const Mlp net(MlpShape{}, rng);
  NormalizationStats norm;
  norm.mapper.weight_thresholds.assign(20, 0.0);
  norm.mapper.sinr_db_thresholds.assign(20, 0.0);
  std::ostringstream agent_out;
  export_decision_log(AgentPolicy{&net, norm.mapper, 0.0}, cfg, seeds, agent_out);
  std::istringstream agent_in(agent_out.str());
  std::getline(agent_in, header);
  for (std::string line; std::getline(agent_in, line);) {
    const int a = std::stoi(split(line)[action_col]);
    CHECK(a >= 0);
    CHECK(a < 4);
  }
  std::ostringstream again;
  export_decision_log(AgentPolicy{&net, norm.mapper, 0.0}, cfg, seeds, again);
  CHECK(again.str() == agent_out.str());
}

TEST_CASE("episode trace covers every interval") {
  const auto cfg = testing::small_env(2, 4, 30);
  std::ostringstream out;
  CHECK(export_episode_trace(BaselineKind::tdm(), cfg, 8, out) == 60);
  CHECK(out.str().rfind("t,ap,action,ue,power_dbm,rate_bpshz,reward\n", 0) == 0);
  CHECK(out.str().find(",off,") != std::string::npos);
}
