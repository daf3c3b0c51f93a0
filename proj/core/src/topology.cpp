#include "rrm/topology.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rrm {

void DeploymentConfig::validate() const {
  if (num_aps < 1) throw std::invalid_argument("num_aps must be >= 1");
  if (num_ues < num_aps) throw std::invalid_argument("num_ues must be >= num_aps");
  if (!(area_side > 0.0)) throw std::invalid_argument("area_side must be positive");
  if (min_ap_ap_dist < 0.0 || min_ap_ue_dist < 0.0)
    throw std::invalid_argument("minimum distances must be non-negative");
}

std::vector<std::vector<int>> Deployment::pools() const {
  std::vector<std::vector<int>> out(ap_positions.size());
  for (int j = 0; j < static_cast<int>(association.size()); ++j) out[association[j]].push_back(j);
  return out;
}

namespace {

template <typename Accept>
Point place(Rng& rng, double side, Accept&& accept, const char* what) {
  std::uniform_real_distribution<double> coord(0.0, side);
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    Point p{coord(rng), coord(rng)};
    if (accept(p)) return p;
  }
  throw PlacementInfeasible(std::string("could not place ") + what + " within " +
                            std::to_string(kMaxPlacementAttempts) + " attempts");
}

}  // namespace

Deployment generate_deployment(const DeploymentConfig& config, Rng& rng) {
  config.validate();
  Deployment d;
  d.ap_positions.reserve(config.num_aps);
  d.ue_positions.reserve(config.num_ues);

  for (int i = 0; i < config.num_aps; ++i) {
    d.ap_positions.push_back(place(
        rng, config.area_side,
        [&](Point p) {
          return std::all_of(d.ap_positions.begin(), d.ap_positions.end(),
                             [&](Point q) { return distance(p, q) >= config.min_ap_ap_dist; });
        },
        "AP"));
  }
  for (int j = 0; j < config.num_ues; ++j) {
    d.ue_positions.push_back(place(
        rng, config.area_side,
        [&](Point p) {
          return std::all_of(d.ap_positions.begin(), d.ap_positions.end(),
                             [&](Point q) { return distance(p, q) >= config.min_ap_ue_dist; });
        },
        "UE"));
  }
  return d;
}

std::vector<int> associate_max_rsrp(const Eigen::MatrixXd& power_gains) {
  const int num_ues = static_cast<int>(power_gains.rows());
  const int num_aps = static_cast<int>(power_gains.cols());
  if (num_aps < 1) throw std::invalid_argument("associate_max_rsrp: no APs");
  if (!power_gains.allFinite() || (power_gains.array() <= 0.0).any())
    throw std::invalid_argument("associate_max_rsrp: gains must be positive and finite");

  std::vector<int> assoc(num_ues);
  std::vector<int> pool_size(num_aps, 0);
  for (int j = 0; j < num_ues; ++j) {
    int best = 0;
    for (int i = 1; i < num_aps; ++i)
      if (power_gains(j, i) > power_gains(j, best)) best = i;
    assoc[j] = best;
    ++pool_size[best];
  }

  if (num_ues < num_aps) return assoc;

  for (int empty = 0; empty < num_aps; ++empty) {
    if (pool_size[empty] > 0) continue;
    int pick = -1;
    for (int j = 0; j < num_ues; ++j) {
      if (pool_size[assoc[j]] < 2) continue;
      if (pick < 0 || power_gains(j, empty) > power_gains(pick, empty)) pick = j;
    }
    // K >= N guarantees some pool has >= 2 members while another is empty.
    --pool_size[assoc[pick]];
    assoc[pick] = empty;
    ++pool_size[empty];
  }
  return assoc;
}

std::vector<std::vector<int>> nearest_remote_agents(std::span<const Point> aps, int n) {
  if (n < 0) throw std::invalid_argument("nearest_remote_agents: n must be >= 0");
  const int num_aps = static_cast<int>(aps.size());
  std::vector<std::vector<int>> out(num_aps);
  for (int i = 0; i < num_aps; ++i) {
    std::vector<int> others;
    for (int k = 0; k < num_aps; ++k)
      if (k != i) others.push_back(k);
    std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
      return distance(aps[i], aps[a]) < distance(aps[i], aps[b]);
    });
    others.resize(std::min<std::size_t>(others.size(), static_cast<std::size_t>(n)));
    out[i] = std::move(others);
  }
  return out;
}

void check_partition(const std::vector<int>& association, int num_aps) {
  std::vector<int> count(num_aps, 0);
  for (int a : association) {
    if (a < 0 || a >= num_aps) throw std::logic_error("association refers to a missing AP");
    ++count[a];
  }
  if (std::find(count.begin(), count.end(), 0) != count.end())
    throw std::logic_error("association leaves an AP with an empty user pool");
}

void to_json(nlohmann::json& j, const Point& p) { j = nlohmann::json::array({p.x, p.y}); }
void from_json(const nlohmann::json& j, Point& p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const DeploymentConfig& c) {
  j = {{"num_aps", c.num_aps},
       {"num_ues", c.num_ues},
       {"area_side_m", c.area_side},
       {"min_ap_ap_dist_m", c.min_ap_ap_dist},
       {"min_ap_ue_dist_m", c.min_ap_ue_dist}};
}
void from_json(const nlohmann::json& j, DeploymentConfig& c) {
  const DeploymentConfig d;
  c.num_aps = j.value("num_aps", d.num_aps);
  c.num_ues = j.value("num_ues", d.num_ues);
  c.area_side = j.value("area_side_m", d.area_side);
  c.min_ap_ap_dist = j.value("min_ap_ap_dist_m", d.min_ap_ap_dist);
  c.min_ap_ue_dist = j.value("min_ap_ue_dist_m", d.min_ap_ue_dist);
}

void to_json(nlohmann::json& j, const Deployment& d) {
  j = {{"ap_positions_m", d.ap_positions},
       {"ue_positions_m", d.ue_positions},
       {"association", d.association},
       {"remote_agents", d.remote_agents}};
}
void from_json(const nlohmann::json& j, Deployment& d) {
  d.ap_positions = j.at("ap_positions_m").get<std::vector<Point>>();
  d.ue_positions = j.at("ue_positions_m").get<std::vector<Point>>();
  d.association = j.value("association", std::vector<int>{});
  d.remote_agents = j.value("remote_agents", std::vector<std::vector<int>>{});
}

}  // namespace rrm
