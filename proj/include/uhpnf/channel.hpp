#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "uhpnf/errors.hpp"

namespace uhpnf {

class Topology;

/// Acoustic link-budget constants. Frequencies in kHz, bandwidth in Hz, levels in dB.
struct ChannelParams {
  double carrier_khz = 20.0;
  double bandwidth_hz = 10'000.0;
  double spreading = 1.5;  ///< geometric spreading exponent k
  double sound_speed = 1500.0;
  /// Converts electrical watts to source level: SL = offset + 10 log10(P).
  double source_level_offset_db = 170.8;
  /// Linear SINR at or above which a link counts as a successful communication.
  double success_threshold = 1.0;

  void validate() const;
};

/// Linear power gains, gains(i, j) = gain from transmitter j to receiver i.
using GainMatrix = Eigen::MatrixXd;

/// Thorp absorption in dB/km for a frequency in kHz.
template <typename Scalar>
Scalar thorp_absorption(Scalar f_khz) {
  if (!(f_khz > Scalar(0))) throw DomainError("thorp_absorption: frequency must be positive");
  const Scalar f2 = f_khz * f_khz;
  return Scalar(0.11) * f2 / (Scalar(1) + f2) + Scalar(44) * f2 / (Scalar(4100) + f2) +
         Scalar(2.75e-4) * f2 + Scalar(0.003);
}

/// Spreading plus absorption loss in dB over d metres (reference distance 1 m).
double transmission_loss(double d_m, const ChannelParams& params);

/// Total in-band ambient noise level in dB.
double noise_level(const ChannelParams& params);

GainMatrix gain_matrix(const Topology& topology, const ChannelParams& params);

/// Per-link linear SINR for transmit powers in watts. Silent links (P = 0) get SINR 0.
Eigen::VectorXd sinr(const Eigen::Ref<const Eigen::VectorXd>& powers_w, const GainMatrix& gains,
                     const ChannelParams& params);

/// Shannon capacity in bit/s.
template <typename Scalar>
Scalar shannon_rate(Scalar sinr_linear, Scalar bandwidth_hz) {
  if (sinr_linear < Scalar(0)) throw DomainError("shannon_rate: negative SINR");
  return bandwidth_hz * std::log2(Scalar(1) + sinr_linear);
}

/// Jain's fairness index (sum x)^2 / (n sum x^2), in [1/n, 1].
template <typename Derived>
typename Derived::Scalar jain_fairness(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) throw DomainError("jain_fairness: empty input");
  const auto& d = x.derived();
  if ((d.array() < Scalar(0)).any()) throw DomainError("jain_fairness: negative value");
  const Scalar sum_sq = d.array().square().sum();
  if (sum_sq == Scalar(0)) throw DomainError("jain_fairness: undefined for all-zero input");
  const Scalar sum = d.sum();
  return sum * sum / (Scalar(x.size()) * sum_sq);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace uhpnf
