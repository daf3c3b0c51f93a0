#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rrm/env.hpp"
#include "rrm/topology.hpp"
#include "test_support.hpp"

using namespace rrm;

TEST_CASE("default deployment honours the separation constraints") {
  DeploymentConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Deployment d = generate_deployment(cfg, rng);
    REQUIRE(d.num_aps() == 4);
    REQUIRE(d.num_ues() == 24);
    for (int a = 0; a < 4; ++a) {
      CHECK(d.ap_positions[a].x >= 0.0);
      CHECK(d.ap_positions[a].x <= 500.0);
      for (int b = a + 1; b < 4; ++b)
        CHECK(distance(d.ap_positions[a], d.ap_positions[b]) >= 35.0);
      for (const Point& u : d.ue_positions) CHECK(distance(d.ap_positions[a], u) >= 10.0);
    }
  }
}

TEST_CASE("unconstrained single AP single UE always places") {
  DeploymentConfig cfg{1, 1, 500.0, 0.0, 0.0};
  Rng rng(7);
  const Deployment d = generate_deployment(cfg, rng);
  CHECK(d.num_aps() == 1);
  CHECK(d.num_ues() == 1);
}

TEST_CASE("impossible AP separation raises PlacementInfeasible") {
  DeploymentConfig cfg{2, 2, 10.0, 100.0, 0.0};
  Rng rng(1);
  CHECK_THROWS_AS(generate_deployment(cfg, rng), PlacementInfeasible);
}

TEST_CASE("config validation rejects fewer UEs than APs") {
  DeploymentConfig cfg{4, 3, 500.0, 35.0, 10.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("generation is deterministic in the seed") {
  DeploymentConfig cfg;
  Rng a(99), b(99), c(100);
  const auto da = generate_deployment(cfg, a);
  CHECK(da == generate_deployment(cfg, b));
  CHECK_FALSE(da == generate_deployment(cfg, c));
}

TEST_CASE("max-RSRP association follows the dominant column") {
  Eigen::MatrixXd g(3, 2);
  g << 5.0, 1.0,
       1.0, 5.0,
       2.0, 3.0;
  CHECK(associate_max_rsrp(g) == std::vector<int>{0, 1, 1});
}

TEST_CASE("association ties go to the lowest AP index") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 1.0,
       0.5, 2.0;
  CHECK(associate_max_rsrp(g) == std::vector<int>{0, 1});
}

TEST_CASE("empty-pool repair moves the UE with the best gain toward the empty AP") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    // Three UEs that all prefer AP 0.
    Eigen::MatrixXd g(3, 2);
    for (int j = 0; j < 3; ++j) {
      g(j, 1) = u(rng);
      g(j, 0) = g(j, 1) + u(rng);
    }
    const auto assoc = associate_max_rsrp(g);
    // Brute force: among single reassignments that fill AP 1, the moved UE
    // must have the largest gain toward AP 1.
    int best = 0;
    for (int j = 1; j < 3; ++j)
      if (g(j, 1) > g(best, 1)) best = j;
    std::vector<int> expect(3, 0);
    expect[best] = 1;
    CHECK(assoc == expect);
  }
}

TEST_CASE("association rejects non-positive gains") {
  Eigen::MatrixXd g(1, 2);
  g << 0.0, 1.0;
  CHECK_THROWS_AS(associate_max_rsrp(g), std::invalid_argument);
}

TEST_CASE("remote agents on a line") {
  const std::vector<Point> aps{{0, 0}, {10, 0}, {20, 0}, {40, 0}};
  const auto r = nearest_remote_agents(aps, 3);
  CHECK(r[0] == std::vector<int>{1, 2, 3});
  CHECK(r[3] == std::vector<int>{2, 1, 0});
  CHECK(nearest_remote_agents(aps, 1)[2] == std::vector<int>{1});
}

TEST_CASE("single AP has no remote agents") {
  const std::vector<Point> aps{{5, 5}};
  CHECK(nearest_remote_agents(aps, 3)[0].empty());
}

TEST_CASE("remote lists equal an all-pairs sort") {
  DeploymentConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto d = generate_deployment(cfg, rng);
    const auto r = nearest_remote_agents(d.ap_positions, 3);
    for (int i = 0; i < 4; ++i) {
      std::vector<std::pair<double, int>> all;
      for (int k = 0; k < 4; ++k)
        if (k != i) all.emplace_back(distance(d.ap_positions[i], d.ap_positions[k]), k);
      std::sort(all.begin(), all.end());
      std::vector<int> expect;
      for (const auto& [dist, k] : all) expect.push_back(k);
      CHECK(r[i] == expect);
    }
  }
}

TEST_CASE("remote lists commute with AP relabeling") {
  DeploymentConfig cfg;
  cfg.num_aps = 6;
  Rng rng(11);
  const auto d = generate_deployment(cfg, rng);
  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // AP i of the original layout becomes AP perm[i].
  std::vector<Point> relabeled(6);
  for (int i = 0; i < 6; ++i) relabeled[perm[i]] = d.ap_positions[i];
  const auto a = nearest_remote_agents(d.ap_positions, 3);
  const auto b = nearest_remote_agents(relabeled, 3);
  for (int i = 0; i < 6; ++i) {
    std::vector<int> mapped;
    for (int k : a[i]) mapped.push_back(perm[k]);
    CHECK(b[perm[i]] == mapped);
  }
}

TEST_CASE("every reset yields a partition with non-empty pools") {
  for (int aps : {1, 2, 4, 8}) {
    Environment env(testing::small_env(aps, std::max(aps, 6), 5));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      env.reset(seed);
      const auto pools = env.deployment().pools();
      int total = 0;
      for (const auto& p : pools) {
        CHECK_FALSE(p.empty());
        total += static_cast<int>(p.size());
      }
      CHECK(total == env.num_ues());
      CHECK_NOTHROW(check_partition(env.deployment().association, aps));
    }
  }
}

TEST_CASE("partition check flags an empty pool") {
  CHECK_THROWS(check_partition({0, 0, 0}, 2));
}

TEST_CASE("deployment round-trips through JSON") {
  Environment env(EnvConfig{});
  env.reset(5);
  const Deployment& d = env.deployment();
  const nlohmann::json j = d;
  CHECK(j.at("association").size() == 24);
  CHECK(j.get<Deployment>() == d);
}
