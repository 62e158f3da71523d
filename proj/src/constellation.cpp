#include "qmimo/constellation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmimo {

ConstellationId constellation_from_string(const std::string& name) {
  if (name == "qpsk") return ConstellationId::kQpsk;
  if (name == "psk8" || name == "8psk") return ConstellationId::kPsk8;
  if (name == "qam8" || name == "8qam") return ConstellationId::kQam8;
  throw std::invalid_argument("unknown constellation: " + name);
}

std::string to_string(ConstellationId id) {
  switch (id) {
    case ConstellationId::kQpsk: return "qpsk";
    case ConstellationId::kPsk8: return "psk8";
    case ConstellationId::kQam8: return "qam8";
  }
  return "?";
}

namespace {

Constellation make_qpsk() {
  // b0 -> sign of Re, b1 -> sign of Im; (0,0) maps to (1+j)/sqrt(2).
  Constellation c{ConstellationId::kQpsk, 2, CVec(4)};
  for (unsigned b = 0; b < 4; ++b) {
    const double re = (b & 2u) ? -M_SQRT1_2 : M_SQRT1_2;
    const double im = (b & 1u) ? -M_SQRT1_2 : M_SQRT1_2;
    c.points[b] = Complex(re, im);
  }
  return c;
}

Constellation make_psk8() {
  // Binary-reflected Gray labels around the unit circle.
  Constellation c{ConstellationId::kPsk8, 3, CVec(8)};
  for (unsigned k = 0; k < 8; ++k) {
    const unsigned label = k ^ (k >> 1);
    const double ang = 2.0 * M_PI * double(k) / 8.0;
    c.points[label] = Complex(std::cos(ang), std::sin(ang));
  }
  return c;
}

Constellation make_qam8() {
  // 4x2 rectangular grid: (b0 b1) Gray-codes the Re level, b2 the Im sign.
  // Scale 1/sqrt(6) gives unit average power.
  Constellation c{ConstellationId::kQam8, 3, CVec(8)};
  const double s = 1.0 / std::sqrt(6.0);
  const double re_level[4] = {-3.0, -1.0, +3.0, +1.0};  // indexed by (b0 b1): 00,01,10,11
  for (unsigned b = 0; b < 8; ++b) {
    const double re = re_level[b >> 1] * s;
    const double im = ((b & 1u) ? -1.0 : 1.0) * s;
    c.points[b] = Complex(re, im);
  }
  return c;
}

}  // namespace

const Constellation& Constellation::get(ConstellationId id) {
  static const Constellation qpsk = make_qpsk();
  static const Constellation psk8 = make_psk8();
  static const Constellation qam8 = make_qam8();
  switch (id) {
    case ConstellationId::kQpsk: return qpsk;
    case ConstellationId::kPsk8: return psk8;
    case ConstellationId::kQam8: return qam8;
  }
  throw std::invalid_argument("unknown constellation id");
}

CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
  const int bps = c.bits_per_symbol;
  if (bits.size() % std::size_t(bps) != 0)
    throw std::invalid_argument("map_bits: bit count not divisible by bits_per_symbol");
  CVec out(bits.size() / std::size_t(bps));
  for (Eigen::Index s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (int b = 0; b < bps; ++b) label = (label << 1) | bits[std::size_t(s) * bps + b];
    out[s] = c.points[label];
  }
  return out;
}

void demap_soft(const CVec& x_hat, const RVec& residual_var, const Constellation& c,
                std::vector<double>& llrs_out) {
  const int bps = c.bits_per_symbol;
  const int npts = int(c.points.size());
  llrs_out.resize(std::size_t(x_hat.size()) * bps);
  for (Eigen::Index s = 0; s < x_hat.size(); ++s) {
    const double v = std::max(residual_var[s], 1e-300);
    double best0[8], best1[8];
    for (int b = 0; b < bps; ++b) {
      best0[b] = std::numeric_limits<double>::infinity();
      best1[b] = std::numeric_limits<double>::infinity();
    }
    for (int a = 0; a < npts; ++a) {
      const double d2 = std::norm(x_hat[s] - c.points[a]) / v;
      for (int b = 0; b < bps; ++b) {
        const bool bit = (a >> (bps - 1 - b)) & 1;
        double& slot = bit ? best1[b] : best0[b];
        if (d2 < slot) slot = d2;
      }
    }
    for (int b = 0; b < bps; ++b) llrs_out[std::size_t(s) * bps + b] = best1[b] - best0[b];
  }
}

}  // namespace qmimo
