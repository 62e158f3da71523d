#pragma once

#include "qmimo/qlm.hpp"
#include "qmimo/types.hpp"

namespace qmimo {

// Fisher information of the 1-bit quantized linear model, evaluated at the
// true parameter in the real-widened domain:
//   I~ = A~^T diag{ w(mu_k) / sv_k } A~,  mu_k = (A~ h~)_k / sqrt(sv_k),
// where sv_k = sigma_k^2 / 2 and w is the sign-observation weight
// phi(mu)^2 / (Phi(mu)(1 - Phi(mu))).
RMat fisher_real(const QuantizedLinearModel& model, const CVec& h_true);

// Complex-domain Fisher from the block structure of the real one:
//   I = 1/4 (I_ReRe + I_ImIm) + j/4 (I_ReIm - I_ImRe).
CMat fisher_complex(const RMat& fisher_tilde);

// trace(I(h)^{-1}); +inf when the Fisher matrix is singular.
double crlb_trace(const QuantizedLinearModel& model, const CVec& h_true);

}  // namespace qmimo
