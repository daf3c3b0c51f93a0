#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrm/env.hpp"
#include "rrm/linklevel.hpp"

namespace rrm {

enum class BaselineType { FullReuse, Tdm, ItLinq };

struct BaselineKind {
  BaselineType type = BaselineType::FullReuse;
  double itlinq_m = 1.0;     // ITLinQ threshold scale (unrelated to reports per UE)
  double itlinq_eta = 0.4;   // ITLinQ SNR exponent

  void validate() const;
  std::string name() const;
  /// Accepts "full_reuse", "tdm", "itlinq".
  static BaselineKind parse(const std::string& name);

  static BaselineKind full_reuse() { return {BaselineType::FullReuse}; }
  static BaselineKind tdm() { return {BaselineType::Tdm}; }
  static BaselineKind itlinq(double m = 1.0, double eta = 0.4) {
    return {BaselineType::ItLinq, m, eta};
  }
};

/// Per AP, the pool member with the largest PF ratio (ties: lowest UE id),
/// or -1 for an empty pool.
std::vector<int> top_pf_selection(const std::vector<std::vector<UeView>>& views);

/// Every AP serves its top-PF UE at full power.
std::vector<ScheduleDecision> full_reuse_decide(const std::vector<std::vector<UeView>>& views,
                                                double p_max_w);

/// Round robin over UEs: UE (t mod K) is served by its AP, all others off.
std::vector<ScheduleDecision> tdm_decide(long t, std::span<const int> association, int num_aps,
                                         double p_max_w);

/// Centralized binary power control. APs are visited in descending order of
/// their selected UE's PF (ties: lowest AP index); the first is always on and
/// each later AP i turns on iff against every already-active AP k
///   max(P|h_{j_k i}|^2, P|h_{j_i k}|^2) / noise < m * (P|h_{j_i i}|^2 / noise)^eta.
/// `selected_ue[i] < 0` marks an AP with nothing to serve.
std::vector<ScheduleDecision> itlinq_decide(const Eigen::MatrixXd& power_gains,
                                            std::span<const int> selected_ue,
                                            std::span<const double> selected_pf, double m,
                                            double eta, double p_max_w, double noise_w);

/// Runs the chosen baseline against the environment's current interval.
/// Full reuse ranks on the reports visible at each AP; ITLinQ is centralized
/// and uses true weights, SINRs and instantaneous gains.
std::vector<ScheduleDecision> baseline_decide(const BaselineKind& kind, const Environment& env);

}  // namespace rrm
