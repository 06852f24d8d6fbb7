#include "uhpnf/channel.hpp"

#include "uhpnf/topology.hpp"

namespace uhpnf {

void ChannelParams::validate() const {
  if (!(carrier_khz > 0)) throw DomainError("channel: carrier frequency must be positive");
  if (!(bandwidth_hz > 0)) throw DomainError("channel: bandwidth must be positive");
  if (!(spreading >= 1.0 && spreading <= 2.0)) throw DomainError("channel: spreading exponent must lie in [1, 2]");
  if (!(sound_speed > 0)) throw DomainError("channel: sound speed must be positive");
  if (!(success_threshold > 0)) throw DomainError("channel: success threshold must be positive");
  if (!std::isfinite(source_level_offset_db)) throw DomainError("channel: source level offset must be finite");
}

double transmission_loss(double d_m, const ChannelParams& params) {
  if (!(d_m >= 1.0)) throw DomainError("transmission_loss: distance below the 1 m reference");
  return 10.0 * params.spreading * std::log10(d_m) +
         thorp_absorption(params.carrier_khz) * (d_m / 1000.0);
}

double noise_level(const ChannelParams& params) {
  return 50.0 - 18.0 * std::log10(params.carrier_khz) + 10.0 * std::log10(params.bandwidth_hz);
}

GainMatrix gain_matrix(const Topology& topology, const ChannelParams& params) {
  const int n = topology.size();
  GainMatrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = topology.link_distance(i, j);
      if (d < 1.0) throw DomainError("gain_matrix: degenerate distance below 1 m");
      g(i, j) = std::pow(10.0, -transmission_loss(d, params) / 10.0);
    }
  }
  return g;
}

Eigen::VectorXd sinr(const Eigen::Ref<const Eigen::VectorXd>& powers_w, const GainMatrix& gains,
                     const ChannelParams& params) {
  const Eigen::Index n = powers_w.size();
  if (gains.rows() != n || gains.cols() != n) throw DomainError("sinr: gain matrix does not match power vector");
  if ((powers_w.array() < 0.0).any()) throw DomainError("sinr: negative transmit power");

  // s_j = 10^((SL0 + 10 log10 P_j)/10) = 10^(SL0/10) * P_j
  const Eigen::VectorXd source = db_to_linear(params.source_level_offset_db) * powers_w;
  const double noise = db_to_linear(noise_level(params));

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (powers_w[i] <= 0.0) continue;
    const double signal = gains(i, i) * source[i];
    double interference = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) interference += gains(i, j) * source[j];
    out[i] = signal / (noise + interference);
  }
  return out;
}

}  // namespace uhpnf
