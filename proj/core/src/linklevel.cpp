#include "rrm/linklevel.hpp"

#include <cmath>
#include <stdexcept>

#include "rrm/common.hpp"

namespace rrm {

RateResult compute_rates(std::span<const ScheduleDecision> decisions,
                         const Eigen::MatrixXd& power_gains, std::span<const int> association,
                         double noise_w) {
  const int num_ues = static_cast<int>(power_gains.rows());
  const int num_aps = static_cast<int>(power_gains.cols());
  if (static_cast<int>(decisions.size()) != num_aps ||
      static_cast<int>(association.size()) != num_ues)
    throw ShapeMismatch("compute_rates: decision/association sizes disagree with gains");

  Eigen::VectorXd tx(num_aps);
  for (int i = 0; i < num_aps; ++i) tx(i) = decisions[i].serving() ? decisions[i].power_w : 0.0;

  RateResult out;
  out.rate.assign(num_ues, 0.0);
  out.interference.resize(num_ues);
  for (int j = 0; j < num_ues; ++j) {
    double sum = 0.0;
    for (int k = 0; k < num_aps; ++k)
      if (k != association[j]) sum += power_gains(j, k) * tx(k);
    out.interference[j] = sum;
  }
  for (int i = 0; i < num_aps; ++i) {
    const auto& d = decisions[i];
    if (!d.serving()) continue;
    if (association[d.ue] != i) throw std::invalid_argument("compute_rates: UE not in AP's pool");
    const double signal = power_gains(d.ue, i) * d.power_w;
    out.rate[d.ue] = std::log2(1.0 + signal / (out.interference[d.ue] + noise_w));
  }
  return out;
}

LinkStats update_link_stats(const LinkStats& stats, double achieved_rate, double interference,
                            const LinkParams& params) {
  LinkStats next;
  next.avg_rate = (1.0 - params.alpha_rate) * stats.avg_rate + params.alpha_rate * achieved_rate;
  next.avg_rate = std::max(next.avg_rate, params.rate_floor);
  next.avg_interference = (1.0 - params.alpha_interference) * stats.avg_interference +
                          params.alpha_interference * interference;
  return next;
}

double measured_sinr(double gain_to_server, double p_max_w, double avg_interference,
                     double noise_w) {
  return gain_to_server * p_max_w / (avg_interference + noise_w);
}

double pf_ratio(double weight, double sinr_linear) { return weight * std::log2(1.0 + sinr_linear); }

}  // namespace rrm
