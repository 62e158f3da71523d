#include "qmimo/crlb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmimo/special.hpp"

namespace qmimo {

RMat fisher_real(const QuantizedLinearModel& model, const CVec& h_true) {
  const RealWidenedModel w = widen_to_real(model, h_true);
  const RVec mu = (w.A * w.h).cwiseQuotient(w.noise_var.cwiseSqrt());
  RVec weight(mu.size());
  for (Eigen::Index k = 0; k < mu.size(); ++k)
    weight[k] = sign_fisher_weight(mu[k]) / w.noise_var[k];
  const RMat aw = weight.cwiseSqrt().asDiagonal() * w.A;
  RMat info(w.A.cols(), w.A.cols());
  info.setZero();
  info.selfadjointView<Eigen::Lower>().rankUpdate(aw.transpose());
  info.triangularView<Eigen::Upper>() = info.transpose();
  return info;
}

CMat fisher_complex(const RMat& fisher_tilde) {
  if (fisher_tilde.rows() % 2 != 0 || fisher_tilde.rows() != fisher_tilde.cols())
    throw std::invalid_argument("fisher_complex: input must be square with even dimension");
  const Eigen::Index p = fisher_tilde.rows() / 2;
  const auto rr = fisher_tilde.topLeftCorner(p, p);
  const auto ri = fisher_tilde.topRightCorner(p, p);
  const auto ir = fisher_tilde.bottomLeftCorner(p, p);
  const auto ii = fisher_tilde.bottomRightCorner(p, p);
  CMat info(p, p);
  info.real() = 0.25 * (rr + ii);
  info.imag() = 0.25 * (ri - ir);
  return info;
}

double crlb_trace(const QuantizedLinearModel& model, const CVec& h_true) {
  const CMat info = fisher_complex(fisher_real(model, h_true));
  // trace(I^{-1}) = sum 1/lambda for Hermitian I; eigenvalues also give a
  // robust singularity test (no pseudo-inverse bound is reported).
  Eigen::SelfAdjointEigenSolver<CMat> eig(info);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const RVec lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 1e-12 * std::max(lambda.maxCoeff(), 0.0))
    return std::numeric_limits<double>::infinity();
  return lambda.cwiseInverse().sum();
}

}  // namespace qmimo
