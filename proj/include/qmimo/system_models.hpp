#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qmimo/constellation.hpp"
#include "qmimo/qlm.hpp"
#include "qmimo/types.hpp"

namespace qmimo {

enum class Waveform { kOfdm, kSc };

Waveform waveform_from_string(const std::string& name);
std::string to_string(Waveform wf);

// Scenario dimensions and statistics. SNR is the total transmit power over
// the number of transmit antennas, P_t / N_t, against unit-variance noise;
// per-symbol transmit power therefore equals snr_linear * noise_var.
struct SystemConfig {
  int n_sub = 32;         // N: subcarriers (OFDM) / block size (SC)
  int n_tx = 2;           // N_t
  int n_rx = 10;          // N_r
  int n_taps = 4;         // L
  int n_pilot_blocks = 4; // T
  int n_data_symbols = 64;  // M: symbol vectors per coherence block
  double snr_db = 0.0;
  Waveform waveform = Waveform::kOfdm;
  ConstellationId constellation = ConstellationId::kQpsk;
  double noise_var = 1.0;   // sigma_w^2 per complex sample
  double tap_var = 0.0;     // per-tap variance sigma_h^2; <= 0 selects 1/L

  double snr_linear() const { return std::pow(10.0, snr_db / 10.0); }
  double symbol_power() const { return snr_linear() * noise_var; }  // P_t / N_t
  double tap_variance() const { return tap_var > 0.0 ? tap_var : 1.0 / n_taps; }

  // True when T*N >= L*N_t, the pilot count needed for estimability.
  bool estimable() const { return n_pilot_blocks * n_sub >= n_taps * n_tx; }
  void validate() const;
};

// Time-domain channel taps h_{n_r n_t} in C^L for every antenna pair; column
// pair_index(n_r, n_t) of `taps` holds one impulse response.
struct ChannelRealization {
  int n_rx = 0, n_tx = 0, n_taps = 0;
  CMat taps;         // L x (n_rx * n_tx)
  RVec tap_profile;  // per-tap variance used in generation (length L)

  int pair_index(int nr, int nt) const { return nr * n_tx + nt; }
  CVec tap(int nr, int nt) const { return taps.col(pair_index(nr, nt)); }
  // Per-antenna stack [h_{n_r,1}; ...; h_{n_r,N_t}] of length L*N_t.
  CVec stack_for_rx(int nr) const;
  double tap_var_mean() const { return tap_profile.mean(); }
};

// Pilot symbols, one N x T matrix per transmit antenna. Frequency-domain for
// OFDM, time-domain for SC; per-symbol power P_t / N_t. Antennas share one
// base sequence per block and are separated by cyclic time shifts >= L,
// recorded in antenna_shift.
struct PilotBlock {
  Waveform waveform = Waveform::kOfdm;
  std::vector<CMat> X;
  double symbol_power = 1.0;
  std::vector<int> antenna_shift;
};

// Per-subcarrier channel matrices: column pair_index(n_r, n_t) of H holds the
// N-point response F_{NxL} h for that antenna pair.
struct FrequencyResponse {
  int n_rx = 0, n_tx = 0;
  CMat H;  // N x (n_rx * n_tx)

  int pair_index(int nr, int nt) const { return nr * n_tx + nt; }
  // N_r x N_t channel matrix at subcarrier n.
  CMat at_subcarrier(int n) const;
};

// Unitary N-point DFT matrix.
CMat dft_matrix(int n);
// First l columns of the N-point DFT with unit-magnitude entries,
// i.e. sqrt(n) times the unitary columns.
CMat dft_tall(int n, int l);

CMat circulant_from_taps(const CVec& h, int n);

PilotBlock gen_orthogonal_pilots(const SystemConfig& cfg);

// Sensing matrix for channel estimation (one model per receive antenna):
// OFDM stacks F^H diag(x_t) F_{NxL} blocks, SC stacks partial circulants.
// A is NT x L*N_t; y is left empty.
QuantizedLinearModel build_estimation_model(const SystemConfig& cfg, const PilotBlock& pilots);

// Sensing matrix for data equalization: N*N_r x N*N_t block matrix of
// F^H Lambda (OFDM) or circulant H (SC) blocks. The per-symbol amplitude
// sqrt(P_t/N_t) is folded into A so the unknowns are unit-power symbols.
QuantizedLinearModel build_equalization_model(const SystemConfig& cfg,
                                              const ChannelRealization& channel);

FrequencyResponse frequency_response(const ChannelRealization& channel, int n_sub);

// Least-squares projection of a frequency response back onto L taps,
// (1/N) F_{NxL}^H H. Inverse of frequency_response on its range.
CMat frequency_to_taps(const FrequencyResponse& fr, int n_taps);

}  // namespace qmimo
