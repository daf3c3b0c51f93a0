#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rrm {

/// Floor on the long-term average rate (bps/Hz); caps weights at 1/floor.
inline constexpr double kRateFloor = 1e-3;

struct LinkParams {
  double alpha_rate = 0.01;
  double alpha_interference = 0.05;
  double rate_floor = kRateFloor;
};

/// Per-UE long-term statistics tracked by the network.
struct LinkStats {
  double avg_rate = kRateFloor;     // R-bar, bps/Hz
  double avg_interference = 0.0;    // I-bar, W

  double weight(double rate_floor = kRateFloor) const {
    return 1.0 / std::max(avg_rate, rate_floor);
  }
};

/// What one AP does in one interval.
struct ScheduleDecision {
  int ue = -1;          // -1: off
  double power_w = 0.0;

  bool serving() const { return ue >= 0; }
  static ScheduleDecision off() { return {}; }
  static ScheduleDecision serve(int ue, double power_w) { return {ue, power_w}; }
  bool operator==(const ScheduleDecision&) const = default;
};

struct RateResult {
  std::vector<double> rate;          // per UE, bps/Hz; 0 for unserved UEs
  std::vector<double> interference;  // per UE, W, from every AP but its own
};

/// Shannon rates of the served UEs and the interference seen by every UE.
/// `decisions` is per AP, `power_gains` is K x N (|h_ji(t)|^2), and
/// `association` maps each UE to its serving AP.
RateResult compute_rates(std::span<const ScheduleDecision> decisions,
                         const Eigen::MatrixXd& power_gains, std::span<const int> association,
                         double noise_w);

/// One step of the rate and interference moving averages.
LinkStats update_link_stats(const LinkStats& stats, double achieved_rate, double interference,
                            const LinkParams& params);

double measured_sinr(double gain_to_server, double p_max_w, double avg_interference,
                     double noise_w);

double pf_ratio(double weight, double sinr_linear);

}  // namespace rrm
