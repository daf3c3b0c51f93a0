#include "rrm/channel.hpp"

#include <numbers>
#include <stdexcept>

namespace rrm {

void PathLossParams::validate() const {
  if (!(d_bp > 0.0)) throw std::invalid_argument("path loss: d_bp must be positive");
  if (alpha1 > alpha2) throw std::invalid_argument("path loss: alpha1 must not exceed alpha2");
}

double path_loss_db(double d, const PathLossParams& params) {
  if (!(d > 0.0)) throw DomainError("path_loss_db: distance must be positive");
  if (d <= params.d_bp) return params.k0_db + 10.0 * params.alpha1 * std::log10(d);
  return params.k0_db + 10.0 * params.alpha2 * std::log10(d) -
         10.0 * (params.alpha2 - params.alpha1) * std::log10(params.d_bp);
}

LongTermGains::LongTermGains(Eigen::MatrixXd amplitude, Eigen::MatrixXd shadowing_db)
    : amplitude_(std::move(amplitude)), shadowing_db_(std::move(shadowing_db)) {
  if (!amplitude_.allFinite() || (amplitude_.array() <= 0.0).any())
    throw DomainError("long-term gains must be positive and finite");
  if (shadowing_db_.rows() != amplitude_.rows() || shadowing_db_.cols() != amplitude_.cols())
    throw ShapeMismatch("shadowing matrix shape differs from gain matrix");
}

LongTermGains draw_long_term_gains(const Deployment& deployment, const PathLossParams& params,
                                   double shadow_std_db, Rng& rng) {
  params.validate();
  const int k = deployment.num_ues();
  const int n = deployment.num_aps();
  Eigen::MatrixXd amp(k, n);
  Eigen::MatrixXd shadow(k, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) {
      const double s = shadow_std_db * normal(rng);
      const double pl = path_loss_db(distance(deployment.ue_positions[j], deployment.ap_positions[i]), params);
      shadow(j, i) = s;
      amp(j, i) = std::pow(10.0, -(pl + s) / 20.0);
    }
  }
  return LongTermGains(std::move(amp), std::move(shadow));
}

FadingProcess::FadingProcess(int num_ues, int num_aps, double doppler_hz, double interval_s,
                             int num_sinusoids, Rng& rng)
    : num_ues_(num_ues),
      num_aps_(num_aps),
      m_(num_sinusoids),
      doppler_hz_(doppler_hz),
      interval_s_(interval_s) {
  if (num_sinusoids < 1) throw std::invalid_argument("fading: need at least one sinusoid");
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> angle(-pi, pi);
  const double wd = 2.0 * pi * doppler_hz * interval_s;
  links_.resize(static_cast<std::size_t>(num_ues) * num_aps);
  for (auto& link : links_) {
    const double theta = angle(rng);
    link.w_re.resize(m_);
    link.w_im.resize(m_);
    link.phase_re.resize(m_);
    link.phase_im.resize(m_);
    for (int n = 0; n < m_; ++n) {
      const double alpha = (2.0 * pi * (n + 1) - pi + theta) / (4.0 * m_);
      link.w_re[n] = wd * std::cos(alpha);
      link.w_im[n] = wd * std::sin(alpha);
      link.phase_re[n] = angle(rng);
      link.phase_im[n] = angle(rng);
    }
  }
}

std::complex<double> FadingProcess::sample(int ue, int ap, long t) const {
  const Link& link = links_[static_cast<std::size_t>(ue) * num_aps_ + ap];
  const double tt = static_cast<double>(t);
  double re = 0.0;
  double im = 0.0;
  for (int n = 0; n < m_; ++n) {
    re += std::cos(link.w_re[n] * tt + link.phase_re[n]);
    im += std::cos(link.w_im[n] * tt + link.phase_im[n]);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  return {re * scale, im * scale};
}

std::complex<double> channel_gain(const LongTermGains& long_term, const FadingProcess& fading,
                                  int ue, int ap, long t) {
  const double h = long_term.amplitude()(ue, ap);
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("channel_gain: invalid long-term gain");
  return h * fading.sample(ue, ap, t);
}

Eigen::MatrixXd power_gains_at(const LongTermGains& long_term, const FadingProcess& fading,
                               long t) {
  const int k = long_term.num_ues();
  const int n = long_term.num_aps();
  Eigen::MatrixXd out(k, n);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) out(j, i) = long_term.power(j, i) * std::norm(fading.sample(j, i, t));
  return out;
}

}  // namespace rrm
