#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rrm/common.hpp"
#include "rrm/topology.hpp"

namespace rrm {

struct PathLossParams {
  double k0_db = 39.0;   // loss at 1 m
  double alpha1 = 2.0;   // exponent up to the break point
  double alpha2 = 4.0;   // exponent beyond it
  double d_bp = 100.0;   // break-point distance, m

  void validate() const;
};

/// Dual-slope path loss in dB; continuous at the break point.
double path_loss_db(double d, const PathLossParams& params);

struct ChannelConfig {
  PathLossParams path_loss{};
  double shadow_std_db = 7.0;
  double carrier_hz = 2.4e9;
  double speed_mps = 1.0;
  double interval_s = 1e-3;
  int num_sinusoids = 16;

  double doppler_hz() const { return speed_mps * carrier_hz / 3.0e8; }
};

/// Long-term amplitude gains H (K x N) and the shadowing draw behind them.
class LongTermGains {
 public:
  LongTermGains() = default;
  /// Validates that every entry of `amplitude` is positive and finite.
  LongTermGains(Eigen::MatrixXd amplitude, Eigen::MatrixXd shadowing_db);

  const Eigen::MatrixXd& amplitude() const { return amplitude_; }
  const Eigen::MatrixXd& shadowing_db() const { return shadowing_db_; }
  Eigen::MatrixXd power() const { return amplitude_.array().square().matrix(); }
  double power(int ue, int ap) const { return amplitude_(ue, ap) * amplitude_(ue, ap); }
  int num_ues() const { return static_cast<int>(amplitude_.rows()); }
  int num_aps() const { return static_cast<int>(amplitude_.cols()); }

 private:
  Eigen::MatrixXd amplitude_;
  Eigen::MatrixXd shadowing_db_;
};

/// H_ji^2 = 10^(-(PL(d_ji) + S_ji)/10), S_ji ~ N(0, shadow_std_db^2) i.i.d.
LongTermGains draw_long_term_gains(const Deployment& deployment, const PathLossParams& params,
                                   double shadow_std_db, Rng& rng);

/// Per-link sum-of-sinusoids Rayleigh fading.
///
/// Each link carries M sinusoids per quadrature with arrival angles
/// alpha_n = (2*pi*n - pi + theta) / (4M) and independent uniform phases:
///
///   Re h(t) = sqrt(1/M) * sum_n cos(w_d t cos(alpha_n) + phi_n)
///   Im h(t) = sqrt(1/M) * sum_n cos(w_d t sin(alpha_n) + psi_n)
///
/// which gives E|h|^2 = 1 and an autocorrelation approaching J0(w_d tau).
/// The state is immutable after construction; sampling is a pure function.
class FadingProcess {
 public:
  FadingProcess() = default;
  FadingProcess(int num_ues, int num_aps, double doppler_hz, double interval_s,
                int num_sinusoids, Rng& rng);

  std::complex<double> sample(int ue, int ap, long t) const;

  int num_ues() const { return num_ues_; }
  int num_aps() const { return num_aps_; }
  int num_sinusoids() const { return m_; }
  double doppler_hz() const { return doppler_hz_; }
  double interval_s() const { return interval_s_; }

 private:
  struct Link {
    std::vector<double> w_re, w_im;      // radians per interval
    std::vector<double> phase_re, phase_im;
  };
  int num_ues_ = 0;
  int num_aps_ = 0;
  int m_ = 0;
  double doppler_hz_ = 0.0;
  double interval_s_ = 0.0;
  std::vector<Link> links_;  // row-major (ue, ap)
};

/// h_ji(t) = H_ji * h~_ji(t).
std::complex<double> channel_gain(const LongTermGains& long_term, const FadingProcess& fading,
                                  int ue, int ap, long t);

/// |h_ji(t)|^2 for every link at interval t, K x N.
Eigen::MatrixXd power_gains_at(const LongTermGains& long_term, const FadingProcess& fading,
                               long t);

}  // namespace rrm
