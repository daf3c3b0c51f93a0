#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rrm/common.hpp"

namespace rrm {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct DeploymentConfig {
  int num_aps = 4;
  int num_ues = 24;
  double area_side = 500.0;       // m
  double min_ap_ap_dist = 35.0;   // m
  double min_ap_ue_dist = 10.0;   // m

  void validate() const;
};

/// Rejection-sampling attempts per placed entity before giving up.
inline constexpr int kMaxPlacementAttempts = 10'000;

struct Deployment {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  std::vector<int> association;                 // UE -> serving AP
  std::vector<std::vector<int>> remote_agents;  // AP -> nearest other APs

  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }

  /// UE ids per AP in ascending order.
  std::vector<std::vector<int>> pools() const;

  bool operator==(const Deployment&) const = default;
};

/// Uniform placement of APs then UEs under the minimum-distance constraints.
/// Only positions are filled; association and remote lists are left empty.
Deployment generate_deployment(const DeploymentConfig& config, Rng& rng);

/// Max-RSRP association from a K x N matrix of linear long-term power gains.
/// Ties go to the lowest AP index. Empty pools are repaired by moving in the
/// UE (taken from a pool of size >= 2) with the highest RSRP toward the empty
/// AP, so every pool ends up nonempty when K >= N.
std::vector<int> associate_max_rsrp(const Eigen::MatrixXd& power_gains);

/// For each AP, up to n other APs by ascending distance (ties: lowest index).
std::vector<std::vector<int>> nearest_remote_agents(std::span<const Point> aps, int n);

/// Throws std::logic_error if the pools are not a partition with no empty pool.
void check_partition(const std::vector<int>& association, int num_aps);

void to_json(nlohmann::json& j, const Point& p);
void from_json(const nlohmann::json& j, Point& p);
void to_json(nlohmann::json& j, const DeploymentConfig& c);
void from_json(const nlohmann::json& j, DeploymentConfig& c);
void to_json(nlohmann::json& j, const Deployment& d);
void from_json(const nlohmann::json& j, Deployment& d);

}  // namespace rrm
