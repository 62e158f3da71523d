#pragma once

#include <string>

#include "qmimo/rng.hpp"
#include "qmimo/system_models.hpp"

namespace qmimo {

enum class ChannelModelKind { kIidGaussian, kEpa };

ChannelModelKind channel_model_from_string(const std::string& name);
std::string to_string(ChannelModelKind k);

struct ChannelModel {
  ChannelModelKind kind = ChannelModelKind::kIidGaussian;
  double epa_rate_hz = 1.92e6;  // sampling rate used to resample the EPA profile
};

// Per-tap variances of the 3GPP TS 36.101 Extended Pedestrian A profile
// resampled at rate_hz by nearest-tap energy accumulation, normalized to
// unit total power. Throws if the profile needs more than n_taps taps.
RVec epa_tap_profile(int n_taps, double rate_hz);

// Per-tap variance profile for the configured model: flat tap_variance() for
// i.i.d. Gaussian taps, the resampled EPA profile otherwise.
RVec channel_tap_profile(const ChannelModel& model, const SystemConfig& cfg);

// Draws every h_{n_r n_t} with independent complex Gaussian taps of the
// profile variances. Draw indices are (pair, tap)-addressed: a fixed seed
// reproduces the identical realization.
ChannelRealization gen_channel(const ChannelModel& model, const SystemConfig& cfg,
                               const RngStream& rng);

}  // namespace qmimo
