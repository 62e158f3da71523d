#include "qmimo/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qmimo {

ChannelModelKind channel_model_from_string(const std::string& name) {
  if (name == "iid") return ChannelModelKind::kIidGaussian;
  if (name == "epa") return ChannelModelKind::kEpa;
  throw std::invalid_argument("unknown channel model: " + name);
}

std::string to_string(ChannelModelKind k) {
  return k == ChannelModelKind::kIidGaussian ? "iid" : "epa";
}

RVec epa_tap_profile(int n_taps, double rate_hz) {
  // TS 36.101 Annex B.2: Extended Pedestrian A delays (ns) and powers (dB).
  constexpr double delays_ns[7] = {0, 30, 70, 90, 110, 190, 410};
  constexpr double powers_db[7] = {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8};
  RVec profile = RVec::Zero(n_taps);
  for (int i = 0; i < 7; ++i) {
    const long tap = std::lround(delays_ns[i] * 1e-9 * rate_hz);
    if (tap >= n_taps)
      throw std::invalid_argument(
          "epa_tap_profile: profile exceeds L taps at this rate; raise L or lower the rate");
    profile[tap] += std::pow(10.0, powers_db[i] / 10.0);
  }
  return profile / profile.sum();
}

RVec channel_tap_profile(const ChannelModel& model, const SystemConfig& cfg) {
  if (model.kind == ChannelModelKind::kIidGaussian)
    return RVec::Constant(cfg.n_taps, cfg.tap_variance());
  return epa_tap_profile(cfg.n_taps, model.epa_rate_hz);
}

ChannelRealization gen_channel(const ChannelModel& model, const SystemConfig& cfg,
                               const RngStream& rng) {
  ChannelRealization ch;
  ch.n_rx = cfg.n_rx;
  ch.n_tx = cfg.n_tx;
  ch.n_taps = cfg.n_taps;
  ch.tap_profile = channel_tap_profile(model, cfg);
  const RVec amp = ch.tap_profile.cwiseSqrt();
  ch.taps.resize(cfg.n_taps, Eigen::Index(cfg.n_rx) * cfg.n_tx);
  for (Eigen::Index pair = 0; pair < ch.taps.cols(); ++pair)
    for (int l = 0; l < cfg.n_taps; ++l)
      ch.taps(l, pair) = amp[l] * rng.cgauss(std::uint64_t(pair) * cfg.n_taps + std::uint64_t(l));
  return ch;
}

}  // namespace qmimo
