#include "qmimo/convcode.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

namespace qmimo {
namespace convcode {

namespace {
constexpr int kMemory = kConstraintLength - 1;  // 6
constexpr int kStates = 1 << kMemory;           // 64
// Tap masks with the current bit in the LSB (delay i at bit i).
constexpr unsigned kTaps1 = 0x6D;  // 133 octal, coefficients reversed to LSB-first
constexpr unsigned kTaps2 = 0x4F;  // 171 octal

inline int parity(unsigned v) { return std::popcount(v) & 1; }
}  // namespace

std::size_t coded_length(std::size_t n_info) {
  const std::size_t steps = n_info + kMemory;
  if (steps % kPuncturePeriod != 0)
    throw std::invalid_argument("coded_length: n_info + 6 must be a multiple of 3");
  return steps * 4 / 3;
}

std::size_t info_length_for(std::size_t capacity) {
  std::size_t steps = capacity * 3 / 4;
  steps -= steps % kPuncturePeriod;
  if (steps < std::size_t(kMemory) + kPuncturePeriod)
    throw std::invalid_argument("info_length_for: capacity too small");
  return steps - kMemory;
}

std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& info) {
  const std::size_t steps = info.size() + kMemory;
  if (steps % kPuncturePeriod != 0)
    throw std::invalid_argument("encode: n_info + 6 must be a multiple of 3");
  std::vector<std::uint8_t> out;
  out.reserve(steps * 4 / 3);
  unsigned reg = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const unsigned bit = i < info.size() ? info[i] : 0u;  // zero termination
    reg = ((reg << 1) | bit) & 0x7Fu;
    const int phase = int(i % kPuncturePeriod);
    if (kPuncturePattern[0][phase]) out.push_back(std::uint8_t(parity(reg & kTaps1)));
    if (kPuncturePattern[1][phase]) out.push_back(std::uint8_t(parity(reg & kTaps2)));
  }
  return out;
}

std::vector<std::uint8_t> viterbi_decode(const std::vector<double>& llrs, std::size_t n_info) {
  const std::size_t steps = n_info + kMemory;
  if (llrs.size() != coded_length(n_info))
    throw std::invalid_argument("viterbi_decode: LLR length does not match the puncture frame");

  // Depuncture: zero LLR at removed positions.
  std::vector<double> l1(steps), l2(steps);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const int phase = int(i % kPuncturePeriod);
    l1[i] = kPuncturePattern[0][phase] ? llrs[pos++] : 0.0;
    l2[i] = kPuncturePattern[1][phase] ? llrs[pos++] : 0.0;
  }

  // Branch metric: sum of (1-2c) * llr/2; maximize.
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> metric(kStates, kNegInf), next(kStates);
  metric[0] = 0.0;
  std::vector<std::uint8_t> decisions(steps * kStates);

  for (std::size_t i = 0; i < steps; ++i) {
    std::fill(next.begin(), next.end(), kNegInf);
    std::uint8_t* dec = decisions.data() + i * kStates;
    for (int s = 0; s < kStates; ++s) {
      if (metric[s] == kNegInf) continue;
      const int max_bit = i < n_info ? 1 : 0;  // tail forces zeros
      for (int b = 0; b <= max_bit; ++b) {
        const unsigned reg = ((unsigned(s) << 1) | unsigned(b)) & 0x7Fu;
        const int ns = int(reg & unsigned(kStates - 1));
        const double m = metric[s] + (parity(reg & kTaps1) ? -l1[i] : l1[i]) * 0.5 +
                         (parity(reg & kTaps2) ? -l2[i] : l2[i]) * 0.5;
        if (m > next[ns]) {
          next[ns] = m;
          dec[ns] = std::uint8_t((s << 1) | b);  // predecessor state and input bit
        }
      }
    }
    metric.swap(next);
  }

  // Terminated trellis: trace back from the zero state.
  std::vector<std::uint8_t> info(n_info);
  int state = 0;
  for (std::size_t i = steps; i-- > 0;) {
    const std::uint8_t d = decisions[i * kStates + std::size_t(state)];
    if (i < n_info) info[i] = d & 1u;
    state = d >> 1;
  }
  return info;
}

}  // namespace convcode

std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& bits, int rows, int cols) {
  if (bits.size() != std::size_t(rows) * std::size_t(cols))
    throw std::invalid_argument("interleave: shape mismatch");
  std::vector<std::uint8_t> out(bits.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[std::size_t(c) * rows + r] = bits[std::size_t(r) * cols + c];
  return out;
}

std::vector<double> deinterleave(const std::vector<double>& vals, int rows, int cols) {
  if (vals.size() != std::size_t(rows) * std::size_t(cols))
    throw std::invalid_argument("deinterleave: shape mismatch");
  std::vector<double> out(vals.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[std::size_t(r) * cols + c] = vals[std::size_t(c) * rows + r];
  return out;
}

std::size_t deinterleave_index(std::size_t interleaved_pos, int rows, int cols) {
  const std::size_t c = interleaved_pos / std::size_t(rows);
  const std::size_t r = interleaved_pos % std::size_t(rows);
  return r * std::size_t(cols) + c;
}

}  // namespace qmimo
