#include "rrm/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rrm {

void BaselineKind::validate() const {
  if (type != BaselineType::ItLinq) return;
  if (!(itlinq_m > 0.0)) throw std::invalid_argument("ITLinQ: M must be positive");
  if (itlinq_eta < 0.0 || itlinq_eta > 1.0) throw std::invalid_argument("ITLinQ: eta must be in [0,1]");
}

std::string BaselineKind::name() const {
  switch (type) {
    case BaselineType::FullReuse: return "full_reuse";
    case BaselineType::Tdm: return "tdm";
    case BaselineType::ItLinq: return "itlinq";
  }
  return "unknown";
}

BaselineKind BaselineKind::parse(const std::string& name) {
  if (name == "full_reuse") return full_reuse();
  if (name == "tdm") return tdm();
  if (name == "itlinq") return itlinq();
  throw std::invalid_argument("unknown baseline '" + name + "' (full_reuse|tdm|itlinq)");
}

std::vector<int> top_pf_selection(const std::vector<std::vector<UeView>>& views) {
  std::vector<int> out(views.size(), -1);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const UeView* best = nullptr;
    for (const auto& v : views[i]) {
      if (!best || v.pf() > best->pf() || (v.pf() == best->pf() && v.ue < best->ue)) best = &v;
    }
    if (best) out[i] = best->ue;
  }
  return out;
}

std::vector<ScheduleDecision> full_reuse_decide(const std::vector<std::vector<UeView>>& views,
                                                double p_max_w) {
  const auto top = top_pf_selection(views);
  std::vector<ScheduleDecision> out(views.size());
  for (std::size_t i = 0; i < views.size(); ++i)
    if (top[i] >= 0) out[i] = ScheduleDecision::serve(top[i], p_max_w);
  return out;
}

std::vector<ScheduleDecision> tdm_decide(long t, std::span<const int> association, int num_aps,
                                         double p_max_w) {
  if (t < 1) throw std::invalid_argument("tdm_decide: t must be >= 1");
  std::vector<ScheduleDecision> out(num_aps);
  const int k = static_cast<int>(association.size());
  if (k == 0) return out;
  const int ue = static_cast<int>(t % k);
  out[association[ue]] = ScheduleDecision::serve(ue, p_max_w);
  return out;
}

std::vector<ScheduleDecision> itlinq_decide(const Eigen::MatrixXd& power_gains,
                                            std::span<const int> selected_ue,
                                            std::span<const double> selected_pf, double m,
                                            double eta, double p_max_w, double noise_w) {
  const int num_aps = static_cast<int>(selected_ue.size());
  if (static_cast<int>(selected_pf.size()) != num_aps || power_gains.cols() != num_aps)
    throw ShapeMismatch("itlinq_decide: per-AP inputs disagree with the gain matrix");

  std::vector<int> order;
  for (int i = 0; i < num_aps; ++i)
    if (selected_ue[i] >= 0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return selected_pf[a] > selected_pf[b]; });

  const double snr_scale = p_max_w / noise_w;
  std::vector<int> active;
  for (int i : order) {
    const int ji = selected_ue[i];
    const double bound = m * std::pow(snr_scale * power_gains(ji, i), eta);
    bool admit = true;
    for (int k : active) {
      const int jk = selected_ue[k];
      const double inr = snr_scale * std::max(power_gains(jk, i), power_gains(ji, k));
      if (!(inr < bound)) {
        admit = false;
        break;
      }
    }
    if (admit) active.push_back(i);
  }

  std::vector<ScheduleDecision> out(num_aps);
  for (int i : active) out[i] = ScheduleDecision::serve(selected_ue[i], p_max_w);
  return out;
}

std::vector<ScheduleDecision> baseline_decide(const BaselineKind& kind, const Environment& env) {
  const double p_max = env.config().p_max_w();
  switch (kind.type) {
    case BaselineType::FullReuse:
      return full_reuse_decide(env.local_views(), p_max);
    case BaselineType::Tdm:
      return tdm_decide(env.t(), env.deployment().association, env.num_agents(), p_max);
    case BaselineType::ItLinq: {
      const auto views = env.true_views();
      const auto selected = top_pf_selection(views);
      std::vector<double> pf(views.size(), 0.0);
      for (std::size_t i = 0; i < views.size(); ++i)
        for (const auto& v : views[i])
          if (v.ue == selected[i]) pf[i] = v.pf();
      return itlinq_decide(env.power_gains(), selected, pf, kind.itlinq_m, kind.itlinq_eta, p_max,
                           env.config().noise_w());
    }
  }
  throw std::logic_error("baseline_decide: unhandled baseline");
}

}  // namespace rrm
