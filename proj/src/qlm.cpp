#include "qmimo/qlm.hpp"

#include <cmath>
#include <stdexcept>

namespace qmimo {

namespace {
// sign(0) = +1 by convention; -0.0 compares equal to 0.0 and also maps to +1.
inline double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }
}  // namespace

void QuantizedLinearModel::validate() const {
  if (noise_var.size() != A.rows())
    throw std::invalid_argument("QuantizedLinearModel: noise_var length != rows of A");
  if ((noise_var.array() <= 0.0).any())
    throw std::invalid_argument("QuantizedLinearModel: noise variances must be positive");
  for (Eigen::Index p = 0; p < A.cols(); ++p)
    if (A.col(p).norm() == 0.0)
      throw std::invalid_argument("QuantizedLinearModel: A has an all-zero column");
  if (y.size() != 0) {
    if (y.size() != A.rows())
      throw std::invalid_argument("QuantizedLinearModel: y length != rows of A");
    for (Eigen::Index k = 0; k < y.size(); ++k)
      if (std::abs(std::abs(y[k].real()) - 1.0) > 0.0 || std::abs(std::abs(y[k].imag()) - 1.0) > 0.0)
        throw std::invalid_argument("QuantizedLinearModel: y entries must be +-1 +- 1j");
  }
  prior.validate();
}

Complex quantize(Complex z) { return {sgn(z.real()), sgn(z.imag())}; }

CVec quantize(const CVec& z) {
  CVec out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out[k] = quantize(z[k]);
  return out;
}

CMat quantize(const CMat& z) {
  CMat out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) out(i, j) = quantize(z(i, j));
  return out;
}

RMat widen_matrix(const CMat& a) {
  const Eigen::Index k = a.rows(), p = a.cols();
  RMat w(2 * k, 2 * p);
  w.topLeftCorner(k, p) = a.real();
  w.topRightCorner(k, p) = -a.imag();
  w.bottomLeftCorner(k, p) = a.imag();
  w.bottomRightCorner(k, p) = a.real();
  return w;
}

RVec widen_vector(const CVec& v) {
  RVec w(2 * v.size());
  w.head(v.size()) = v.real();
  w.tail(v.size()) = v.imag();
  return w;
}

CVec narrow_to_complex(const RVec& v) {
  if (v.size() % 2 != 0) throw std::invalid_argument("narrow_to_complex: odd length");
  const Eigen::Index p = v.size() / 2;
  CVec out(p);
  out.real() = v.head(p);
  out.imag() = v.tail(p);
  return out;
}

RealWidenedModel widen_to_real(const QuantizedLinearModel& model, const CVec& h) {
  if (h.size() != model.A.cols())
    throw std::invalid_argument("widen_to_real: h length != cols of A");
  RealWidenedModel w;
  w.A = widen_matrix(model.A);
  w.h = widen_vector(h);
  if (model.y.size() != 0) w.y = widen_vector(model.y);
  w.noise_var.resize(2 * model.noise_var.size());
  w.noise_var.head(model.noise_var.size()) = 0.5 * model.noise_var;
  w.noise_var.tail(model.noise_var.size()) = 0.5 * model.noise_var;
  return w;
}

CVec simulate_observation(const CMat& a, const CVec& h, const RVec& noise_var,
                          const RngStream& rng, std::uint64_t idx0) {
  CVec z = a * h;
  for (Eigen::Index k = 0; k < z.size(); ++k)
    z[k] += std::sqrt(noise_var[k]) * rng.cgauss(idx0 + std::uint64_t(k));
  return quantize(z);
}

}  // namespace qmimo
