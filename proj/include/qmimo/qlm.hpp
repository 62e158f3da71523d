#pragma once

#include <cstdint>

#include "qmimo/prior.hpp"
#include "qmimo/rng.hpp"
#include "qmimo/types.hpp"

namespace qmimo {

// Generic 1-bit quantized linear observation model y = Q(A h + w), the
// common shape of all four estimation/equalization problems. noise_var holds
// the per-row complex noise variance sigma_k^2 (each real part has variance
// sigma_k^2 / 2).
struct QuantizedLinearModel {
  CMat A;
  RVec noise_var;
  CVec y;  // entries in {+-1 +- 1j}; may be empty before observation
  Prior prior = Prior::gaussian(1.0);

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  void validate() const;
};

// Real-valued widening of the complex model: A~ = [[Re A, -Im A],[Im A, Re A]],
// h~ = [Re h; Im h], per-row noise variance sigma_k^2 / 2.
struct RealWidenedModel {
  RMat A;
  RVec h;
  RVec y;
  RVec noise_var;
};

Complex quantize(Complex z);
CVec quantize(const CVec& z);
CMat quantize(const CMat& z);

RMat widen_matrix(const CMat& a);
RVec widen_vector(const CVec& v);
CVec narrow_to_complex(const RVec& v);

RealWidenedModel widen_to_real(const QuantizedLinearModel& model, const CVec& h);

// Draws w with independent CN(0, noise_var_k) entries from the addressed
// stream (draw k uses index idx0 + k) and returns Q(A h + w).
CVec simulate_observation(const CMat& a, const CVec& h, const RVec& noise_var,
                          const RngStream& rng, std::uint64_t idx0 = 0);

}  // namespace qmimo
