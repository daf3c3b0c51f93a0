#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rrm/linklevel.hpp"
#include "test_support.hpp"

using namespace rrm;

namespace {

// Independent per-UE double loop.
std::vector<double> naive_rates(const std::vector<ScheduleDecision>& d, const Eigen::MatrixXd& g,
                                const std::vector<int>& assoc, double noise) {
  std::vector<double> out(g.rows(), 0.0);
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    if (d[i].ue < 0) continue;
    const int j = d[i].ue;
    double interf = 0.0;
    for (int k = 0; k < static_cast<int>(d.size()); ++k) {
      if (k == i || d[k].ue < 0) continue;
      interf += g(j, k) * d[k].power_w;
    }
    out[j] = std::log2(1.0 + g(j, i) * d[i].power_w / (interf + noise));
  }
  return out;
}

}  // namespace

TEST_CASE("single transmitter at unit SNR gives one bit per second per hertz") {
  Eigen::MatrixXd g(1, 1);
  g << 2.0;
  const std::vector<ScheduleDecision> d{ScheduleDecision::serve(0, 0.5)};
  const std::vector<int> assoc{0};
  const auto r = compute_rates(d, g, assoc, 1.0);
  CHECK(r.rate[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.interference[0] == 0.0);
}

TEST_CASE("all APs off: no rate and no interference") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(4, 2, 0.3);
  const std::vector<ScheduleDecision> d(2);
  const std::vector<int> assoc{0, 0, 1, 1};
  const auto r = compute_rates(d, g, assoc, 1e-3);
  for (int j = 0; j < 4; ++j) {
    CHECK(r.rate[j] == 0.0);
    CHECK(r.interference[j] == 0.0);
  }
}

TEST_CASE("rates match a direct summation on random instances") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(1e-9, 1e-6);
  std::uniform_real_distribution<double> p(1e-3, 1e-2);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 3, k = 6;
    Eigen::MatrixXd g(k, n);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) g(j, i) = u(rng);
    const std::vector<int> assoc{0, 0, 1, 1, 2, 2};
    std::vector<ScheduleDecision> d(n);
    for (int i = 0; i < n; ++i)
      if (rng() % 4 != 0) d[i] = ScheduleDecision::serve(2 * i + static_cast<int>(rng() % 2), p(rng));
    const auto got = compute_rates(d, g, assoc, 4e-14);
    const auto want = naive_rates(d, g, assoc, 4e-14);
    for (int j = 0; j < k; ++j) CHECK(testing::rel_err(got.rate[j], want[j]) < 1e-12);
    // Unserved UEs still see interference from every other active AP.
    for (int j = 0; j < k; ++j) {
      double ref = 0.0;
      for (int i = 0; i < n; ++i)
        if (i != assoc[j] && d[i].serving()) ref += g(j, i) * d[i].power_w;
      CHECK(testing::rel_err(got.interference[j], ref) < 1e-12);
    }
  }
}

TEST_CASE("serving a UE outside the AP pool is rejected") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(2, 2, 1.0);
  const std::vector<ScheduleDecision> d{ScheduleDecision::serve(1, 1.0), {}};
  const std::vector<int> assoc{0, 1};
  CHECK_THROWS(compute_rates(d, g, assoc, 1.0));
}

TEST_CASE("rate rises with own power and falls with interferer power") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd g(2, 2);
    g << u(rng), u(rng), u(rng), u(rng);
    const std::vector<int> assoc{0, 1};
    const double p0 = u(rng), p1 = u(rng), bump = u(rng);
    auto rate0 = [&](double a, double b) {
      const std::vector<ScheduleDecision> d{ScheduleDecision::serve(0, a), ScheduleDecision::serve(1, b)};
      return compute_rates(d, g, assoc, 0.1).rate[0];
    };
    CHECK(rate0(p0 + bump, p1) > rate0(p0, p1));
    CHECK(rate0(p0, p1 + bump) < rate0(p0, p1));
  }
}

TEST_CASE("moving averages: fixed point and floor clamp") {
  const LinkParams lp;
  CHECK(update_link_stats({1.0, 0.0}, 1.0, 0.0, lp).avg_rate == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(update_link_stats({kRateFloor, 0.0}, 0.0, 0.0, lp).avg_rate == kRateFloor);
  CHECK(LinkStats{}.weight() == doctest::Approx(1.0 / kRateFloor));
}

TEST_CASE("cold-start average rate equals the unrolled recursion") {
  const LinkParams lp;
  const double a = lp.alpha_rate;
  const double rate = 0.7;
  LinkStats s;
  for (int t = 1; t <= 300; ++t) {
    s = update_link_stats(s, rate, 0.0, lp);
    double expect = lp.rate_floor * std::pow(1.0 - a, t);
    for (int tau = 0; tau < t; ++tau) expect += a * std::pow(1.0 - a, t - tau - 1) * rate;
    CHECK(s.avg_rate == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("moving averages stay between the old value and the new sample") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  const LinkParams lp;
  for (int trial = 0; trial < 1000; ++trial) {
    const LinkStats old{u(rng), u(rng)};
    const double r = u(rng), i = u(rng);
    const LinkStats next = update_link_stats(old, r, i, lp);
    CHECK(next.avg_rate >= std::min(old.avg_rate, r) - 1e-15);
    CHECK(next.avg_rate <= std::max(old.avg_rate, r) + 1e-15);
    CHECK(next.avg_interference >= std::min(old.avg_interference, i) - 1e-15);
    CHECK(next.avg_interference <= std::max(old.avg_interference, i) + 1e-15);
  }
}

TEST_CASE("average interference converges on a static channel") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.2,
       0.3, 1.0;
  const std::vector<int> assoc{0, 1};
  const std::vector<ScheduleDecision> d{ScheduleDecision::serve(0, 1.0), ScheduleDecision::serve(1, 1.0)};
  const double truth = 0.2;
  LinkStats s;
  double prev_gap = std::abs(s.avg_interference - truth);
  for (int t = 0; t < 200; ++t) {
    const auto r = compute_rates(d, g, assoc, 0.1);
    s = update_link_stats(s, r.rate[0], r.interference[0], LinkParams{});
    const double gap = std::abs(s.avg_interference - truth);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-4);
}

TEST_CASE("measured SINR") {
  CHECK(measured_sinr(1.0, 2.0, 0.0, 2.0) == doctest::Approx(1.0));
  CHECK(measured_sinr(2.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double g = u(rng), p = u(rng), i = u(rng), n = u(rng) + 0.1;
    CHECK(measured_sinr(g, p, i, n) == g * p / (i + n));
  }
}

TEST_CASE("PF ratio") {
  CHECK(pf_ratio(2.0, 3.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(pf_ratio(0.0, 1e9) == 0.0);
}

TEST_CASE("ranking by PF ratio matches an exhaustive comparison") {
  Rng rng(5);
  std::uniform_real_distribution<double> w(0.5, 1000.0), s(0.0, 100.0);
  std::vector<double> weight(24), sinr(24);
  for (int j = 0; j < 24; ++j) {
    weight[j] = w(rng);
    sinr[j] = s(rng);
  }
  std::vector<int> order(24);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pf_ratio(weight[a], sinr[a]) > pf_ratio(weight[b], sinr[b]);
  });
  // Position of each UE = number of UEs with a strictly larger PF.
  for (int pos = 0; pos < 24; ++pos) {
    const int j = order[pos];
    int larger = 0;
    for (int k = 0; k < 24; ++k)
      if (weight[k] * std::log2(1.0 + sinr[k]) > weight[j] * std::log2(1.0 + sinr[j])) ++larger;
    CHECK(larger == pos);
  }
}
