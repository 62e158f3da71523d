#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace qmimo {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). A keyed bijection of a 128-bit counter:
// draws are addressed, not sequential, so streams can be evaluated in any
// order (or in parallel) and still produce identical values.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

// One independent stream per (seed, role, trial). Within a stream every draw
// has an explicit 64-bit index; the same index always yields the same value,
// which makes Monte Carlo trials order-independent and worker-count-proof.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t role, std::uint32_t trial)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, role_(role), trial_(trial) {}

  std::array<std::uint32_t, 4> raw(std::uint64_t idx) const {
    return Philox4x32::block({std::uint32_t(idx), std::uint32_t(idx >> 32), role_, trial_}, key_);
  }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform(std::uint64_t idx) const {
    const auto r = raw(idx);
    const std::uint64_t bits = (std::uint64_t(r[0]) << 32) | r[1];
    return double((bits >> 11) + 1) * 0x1.0p-53;
  }

  // Two independent N(0,1) variates per index (Box-Muller on one block).
  std::array<double, 2> gauss_pair(std::uint64_t idx) const {
    const auto r = raw(idx);
    const std::uint64_t b0 = (std::uint64_t(r[0]) << 32) | r[1];
    const std::uint64_t b1 = (std::uint64_t(r[2]) << 32) | r[3];
    const double u1 = double((b0 >> 11) + 1) * 0x1.0p-53;
    const double u2 = double(b1 >> 11) * 0x1.0p-53;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    return {rad * std::cos(2.0 * M_PI * u2), rad * std::sin(2.0 * M_PI * u2)};
  }

  double gauss(std::uint64_t idx) const { return gauss_pair(idx)[0]; }

  // CN(0,1): unit complex variance, i.e. each part N(0, 1/2).
  std::complex<double> cgauss(std::uint64_t idx) const {
    const auto g = gauss_pair(idx);
    return {g[0] * M_SQRT1_2, g[1] * M_SQRT1_2};
  }

  // Fair bit at position idx.
  int bit(std::uint64_t idx) const {
    const auto r = raw(idx / 128);
    const std::uint32_t word = r[(idx / 32) % 4];
    return int((word >> (idx % 32)) & 1u);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t role_;
  std::uint32_t trial_;
};

}  // namespace qmimo
