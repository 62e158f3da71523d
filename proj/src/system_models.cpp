#include "qmimo/system_models.hpp"

#include <cmath>
#include <stdexcept>

#include "qmimo/rng.hpp"

namespace qmimo {

Waveform waveform_from_string(const std::string& name) {
  if (name == "ofdm" || name == "mc") return Waveform::kOfdm;
  if (name == "sc") return Waveform::kSc;
  throw std::invalid_argument("unknown waveform: " + name);
}

std::string to_string(Waveform wf) { return wf == Waveform::kOfdm ? "ofdm" : "sc"; }

void SystemConfig::validate() const {
  if (n_sub < 1 || n_tx < 1 || n_rx < 1 || n_taps < 1 || n_pilot_blocks < 1 || n_data_symbols < 1)
    throw std::invalid_argument("SystemConfig: all counts must be >= 1");
  if (n_taps > n_sub) throw std::invalid_argument("SystemConfig: L must not exceed N");
  if (noise_var <= 0.0) throw std::invalid_argument("SystemConfig: noise_var must be positive");
}

CVec ChannelRealization::stack_for_rx(int nr) const {
  CVec h(Eigen::Index(n_taps) * n_tx);
  for (int nt = 0; nt < n_tx; ++nt) h.segment(Eigen::Index(nt) * n_taps, n_taps) = tap(nr, nt);
  return h;
}

CMat FrequencyResponse::at_subcarrier(int n) const {
  CMat hn(n_rx, n_tx);
  for (int nr = 0; nr < n_rx; ++nr)
    for (int nt = 0; nt < n_tx; ++nt) hn(nr, nt) = H(n, pair_index(nr, nt));
  return hn;
}

CMat dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dft_matrix: n must be >= 1");
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(double(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double ang = -2.0 * M_PI * double((long(r) * c) % n) / double(n);
      f(r, c) = scale * Complex(std::cos(ang), std::sin(ang));
    }
  return f;
}

CMat dft_tall(int n, int l) {
  if (l < 1 || l > n) throw std::invalid_argument("dft_tall: need 1 <= l <= n");
  CMat f(n, l);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < l; ++c) {
      const double ang = -2.0 * M_PI * double((long(r) * c) % n) / double(n);
      f(r, c) = Complex(std::cos(ang), std::sin(ang));
    }
  return f;
}

CMat circulant_from_taps(const CVec& h, int n) {
  if (h.size() > n) throw std::invalid_argument("circulant_from_taps: more taps than rows");
  CMat m = CMat::Zero(n, n);
  for (int c = 0; c < n; ++c)
    for (Eigen::Index l = 0; l < h.size(); ++l) m((c + l) % n, c) = h[l];
  return m;
}

namespace {

constexpr std::uint64_t kPilotSeed = 0x51A07EB5C0FFEE00ull;
constexpr std::uint32_t kPilotRole = 0xA110u;

// Common unit-modulus base sequence for block t, shared by all antennas.
// OFDM: pseudo-random phases in the frequency domain, so the transmitted
// time signal has the same high-PAPR statistics as OFDM data. SC: Zadoff-Chu
// with a per-block frequency offset, keeping the constant envelope and the
// ideal cyclic autocorrelation.
CVec pilot_base(const SystemConfig& cfg, int t) {
  const int n = cfg.n_sub;
  CVec base(n);
  if (cfg.waveform == Waveform::kOfdm) {
    RngStream rng(kPilotSeed, kPilotRole, std::uint32_t(t));
    for (int i = 0; i < n; ++i) {
      const double ang = 2.0 * M_PI * rng.uniform(std::uint64_t(i));
      base[i] = Complex(std::cos(ang), std::sin(ang));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double zc = (n % 2 == 0) ? -M_PI * double((long(i) * i) % (2 * n)) / double(n)
                                     : -M_PI * double((long(i) * (i + 1)) % (2 * n)) / double(n);
      const double shift = 2.0 * M_PI * double((long(t) * i) % n) / double(n);
      base[i] = Complex(std::cos(zc + shift), std::sin(zc + shift));
    }
  }
  return base;
}

void check_pilot_orthogonality(const CMat& a) {
  const CMat gram = a.adjoint() * a;
  const double diag_mass = gram.diagonal().norm();
  CMat off = gram;
  off.diagonal().setZero();
  if (off.norm() > 1e-8 * diag_mass)
    throw std::runtime_error("gen_orthogonal_pilots: assembled pilots are not orthogonal");
}

}  // namespace

PilotBlock gen_orthogonal_pilots(const SystemConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_sub, n_tx = cfg.n_tx, l = cfg.n_taps, t_blocks = cfg.n_pilot_blocks;
  // Cyclic shift between antennas. For the SC chirp base, keep the antenna
  // images off the half-period alias (N/2 shifts fold onto a +-1 pattern of
  // the same window); N/(2 N_t) does that whenever it is still >= L.
  int stride = (n + n_tx - 1) / n_tx;
  if (cfg.waveform == Waveform::kSc) {
    const int half = n / (2 * n_tx);
    if (half >= l && (n_tx - 1) * half <= n - l) stride = half;
  }
  if (n < l * n_tx || stride < l)
    throw std::invalid_argument("gen_orthogonal_pilots: need N >= L*N_t for orthogonal pilots");

  PilotBlock pb;
  pb.waveform = cfg.waveform;
  pb.symbol_power = cfg.symbol_power();
  pb.X.assign(std::size_t(n_tx), CMat(n, t_blocks));
  const double amp = std::sqrt(pb.symbol_power);
  pb.antenna_shift.resize(std::size_t(n_tx));

  for (int t = 0; t < t_blocks; ++t) {
    const CVec base = pilot_base(cfg, t);
    for (int nt = 0; nt < n_tx; ++nt) {
      const int shift = nt * stride;
      pb.antenna_shift[std::size_t(nt)] = shift;
      if (cfg.waveform == Waveform::kOfdm) {
        // Cyclic time shift applied as a frequency-domain linear phase.
        for (int i = 0; i < n; ++i) {
          const double ang = -2.0 * M_PI * double((long(i) * shift) % n) / double(n);
          pb.X[nt](i, t) = amp * base[i] * Complex(std::cos(ang), std::sin(ang));
        }
      } else {
        for (int i = 0; i < n; ++i) pb.X[nt](i, t) = amp * base[((i - shift) % n + n) % n];
      }
    }
  }

  check_pilot_orthogonality(build_estimation_model(cfg, pb).A);
  return pb;
}

QuantizedLinearModel build_estimation_model(const SystemConfig& cfg, const PilotBlock& pilots) {
  const int n = cfg.n_sub, l = cfg.n_taps, n_tx = cfg.n_tx, t_blocks = cfg.n_pilot_blocks;
  if (int(pilots.X.size()) != n_tx || pilots.X[0].rows() != n || pilots.X[0].cols() != t_blocks)
    throw std::invalid_argument("build_estimation_model: pilots inconsistent with config");

  QuantizedLinearModel m;
  m.A.resize(Eigen::Index(n) * t_blocks, Eigen::Index(l) * n_tx);
  if (cfg.waveform == Waveform::kOfdm) {
    const CMat fh = dft_matrix(n).adjoint();
    const CMat fnl = dft_tall(n, l);
    for (int nt = 0; nt < n_tx; ++nt)
      for (int t = 0; t < t_blocks; ++t)
        m.A.block(Eigen::Index(t) * n, Eigen::Index(nt) * l, n, l) =
            fh * pilots.X[std::size_t(nt)].col(t).asDiagonal() * fnl;
  } else {
    for (int nt = 0; nt < n_tx; ++nt)
      for (int t = 0; t < t_blocks; ++t) {
        auto blk = m.A.block(Eigen::Index(t) * n, Eigen::Index(nt) * l, n, l);
        for (int c = 0; c < l; ++c)
          for (int r = 0; r < n; ++r)
            blk(r, c) = pilots.X[std::size_t(nt)](((r - c) % n + n) % n, t);
      }
  }
  m.noise_var = RVec::Constant(m.A.rows(), cfg.noise_var);
  m.prior = Prior::gaussian(cfg.tap_variance());
  return m;
}

QuantizedLinearModel build_equalization_model(const SystemConfig& cfg,
                                              const ChannelRealization& channel) {
  if (channel.n_rx != cfg.n_rx || channel.n_tx != cfg.n_tx || channel.n_taps > cfg.n_sub)
    throw std::invalid_argument("build_equalization_model: channel inconsistent with config");
  const int n = cfg.n_sub;
  const double amp = std::sqrt(cfg.symbol_power());

  QuantizedLinearModel m;
  m.A.resize(Eigen::Index(n) * cfg.n_rx, Eigen::Index(n) * cfg.n_tx);
  if (cfg.waveform == Waveform::kOfdm) {
    const CMat fh = dft_matrix(n).adjoint();
    const CMat fnl = dft_tall(n, channel.n_taps);
    for (int nr = 0; nr < cfg.n_rx; ++nr)
      for (int nt = 0; nt < cfg.n_tx; ++nt) {
        const CVec lambda = fnl * channel.tap(nr, nt);
        m.A.block(Eigen::Index(nr) * n, Eigen::Index(nt) * n, n, n) =
            amp * (fh * lambda.asDiagonal());
      }
  } else {
    for (int nr = 0; nr < cfg.n_rx; ++nr)
      for (int nt = 0; nt < cfg.n_tx; ++nt)
        m.A.block(Eigen::Index(nr) * n, Eigen::Index(nt) * n, n, n) =
            amp * circulant_from_taps(channel.tap(nr, nt), n);
  }
  m.noise_var = RVec::Constant(m.A.rows(), cfg.noise_var);
  m.prior = Prior::discrete_uniform(Constellation::get(cfg.constellation).points);
  return m;
}

FrequencyResponse frequency_response(const ChannelRealization& channel, int n_sub) {
  FrequencyResponse fr;
  fr.n_rx = channel.n_rx;
  fr.n_tx = channel.n_tx;
  fr.H = dft_tall(n_sub, channel.n_taps) * channel.taps;
  return fr;
}

CMat frequency_to_taps(const FrequencyResponse& fr, int n_taps) {
  const int n = int(fr.H.rows());
  return (dft_tall(n, n_taps).adjoint() * fr.H) / double(n);
}

}  // namespace qmimo
