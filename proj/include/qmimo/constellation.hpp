#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmimo/types.hpp"

namespace qmimo {

enum class ConstellationId { kQpsk, kPsk8, kQam8 };

ConstellationId constellation_from_string(const std::string& name);
std::string to_string(ConstellationId id);

// Gray-labeled constellation with unit average power. points[b] is the point
// whose bit label is b (MSB-first).
struct Constellation {
  ConstellationId id;
  int bits_per_symbol;
  CVec points;

  static const Constellation& get(ConstellationId id);

  Complex map(unsigned label) const { return points[label]; }
};

// bits.size() must be a multiple of bits_per_symbol; bits are consumed
// MSB-first per symbol.
CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);

// Max-log bit LLRs under x_hat ~ CN(x, residual_var); positive LLR favors
// bit 0. residual_var is per symbol.
void demap_soft(const CVec& x_hat, const RVec& residual_var, const Constellation& c,
                std::vector<double>& llrs_out);

}  // namespace qmimo
