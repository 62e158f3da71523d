#include <cmath>
#include <stdexcept>

#include "qmimo/estimators.hpp"

namespace qmimo {

namespace {
constexpr double kTwoOverPi = 2.0 / M_PI;

RVec expand_prior(const RVec& rhh_diag, Eigen::Index p) {
  if (rhh_diag.size() == 1) return RVec::Constant(p, rhh_diag[0]);
  if (rhh_diag.size() != p) throw std::invalid_argument("prior diagonal has wrong length");
  return rhh_diag;
}
}  // namespace

BussgangModel bussgang_decompose(const QuantizedLinearModel& model, const RVec& rhh_diag) {
  const Eigen::Index k2 = 2 * model.rows(), p = model.cols();
  const RVec prior = expand_prior(rhh_diag, p);
  if ((prior.array() < 0.0).any())
    throw std::invalid_argument("bussgang_decompose: negative prior variance");

  const RMat a = widen_matrix(model.A);
  RVec rh(2 * p), rw(k2);
  rh.head(p) = 0.5 * prior;
  rh.tail(p) = 0.5 * prior;
  rw.head(model.rows()) = 0.5 * model.noise_var;
  rw.tail(model.rows()) = 0.5 * model.noise_var;

  // Rzz = A Rhh A^T + Rww
  const RMat as = a * rh.cwiseSqrt().asDiagonal();
  RMat rzz(k2, k2);
  rzz.setZero();
  rzz.selfadjointView<Eigen::Lower>().rankUpdate(as);
  rzz.triangularView<Eigen::Upper>() = rzz.transpose();
  rzz.diagonal() += rw;

  const RVec d = rzz.diagonal();
  if ((d.array() <= 0.0).any())
    throw std::runtime_error("bussgang_decompose: Rzz is not positive definite");
  const RVec dinv_sqrt = d.cwiseSqrt().cwiseInverse();

  BussgangModel out;
  out.k_gain = std::sqrt(kTwoOverPi) * dinv_sqrt;

  // Correlation matrix and the arcsine law for the quantized covariance.
  RMat corr = dinv_sqrt.asDiagonal() * rzz * dinv_sqrt.asDiagonal();
  corr = corr.array().min(1.0).max(-1.0).matrix();
  RMat ryy = (kTwoOverPi * corr.array().asin()).matrix();
  ryy.diagonal().setOnes();

  out.r_ee = ryy - kTwoOverPi * corr;
  out.b = out.k_gain.asDiagonal() * a;
  out.r_eta = out.r_ee;
  out.r_eta.diagonal() += out.k_gain.array().square().matrix().cwiseProduct(rw);

  const double mean_dz = d.mean();
  out.scalar_k = std::sqrt(kTwoOverPi / mean_dz);
  out.scalar_noise_var = kTwoOverPi * rw.mean() / mean_dz + (1.0 - kTwoOverPi);
  return out;
}

BussgangSolver BussgangSolver::build(const BussgangModel& d, const RVec& rhh_diag,
                                     double variance_floor) {
  const Eigen::Index p2 = d.b.cols(), p = p2 / 2;
  const RVec prior = expand_prior(rhh_diag, p);

  BussgangSolver s;
  RMat r_eta = d.r_eta;
  Eigen::LLT<RMat> llt(r_eta);
  if (llt.info() != Eigen::Success) {
    r_eta.diagonal().array() += variance_floor;
    llt.compute(r_eta);
    s.regularized = true;
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("BussgangSolver: effective noise covariance is singular");
  }
  const RMat t = llt.solve(d.b);  // R_eta^{-1} B
  RMat g = d.b.transpose() * t;
  for (Eigen::Index i = 0; i < p2; ++i)
    g(i, i) += 1.0 / std::max(0.5 * prior[i % p], variance_floor);
  Eigen::LLT<RMat> lltg(g);
  s.G = lltg.solve(t.transpose());
  const RMat ginv = lltg.solve(RMat::Identity(p2, p2));
  s.posterior_var.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) s.posterior_var[i] = ginv(i, i) + ginv(i + p, i + p);
  return s;
}

BatchEstimate bussgang_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                      const BussgangSolver& solver) {
  const Eigen::Index k = model.rows(), r = y.cols();
  RMat yw(2 * k, r);
  yw.topRows(k) = y.real();
  yw.bottomRows(k) = y.imag();
  const RMat hw = solver.G * yw;
  BatchEstimate out;
  out.estimates.resize(model.cols(), r);
  out.estimates.real() = hw.topRows(model.cols());
  out.estimates.imag() = hw.bottomRows(model.cols());
  out.iterations.assign(std::size_t(r), 1);
  out.converged.assign(std::size_t(r), true);
  out.flops_estimate = double(k) * double(model.cols()) * double(r);
  out.regularized = solver.regularized;
  return out;
}

EstimateReport bussgang_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag,
                                 const BussgangModel& decomposition) {
  model.validate();
  const BussgangSolver solver = BussgangSolver::build(decomposition, rhh_diag);
  const BatchEstimate b = bussgang_estimate_batch(model, model.y, solver);
  EstimateReport rep;
  rep.estimate = b.estimates.col(0);
  rep.iterations = 1;
  rep.converged = true;
  rep.flops_estimate = b.flops_estimate;
  rep.regularized = b.regularized;
  return rep;
}

FrequencyResponse bussgang_subcarrier_estimate(const std::vector<CMat>& y_time,
                                               const PilotBlock& pilots, double k,
                                               double noise_var_eff, double sigma_h_freq2) {
  const int n_rx = int(y_time.size());
  const int n = int(y_time[0].rows());
  const int t_blocks = int(y_time[0].cols());
  const int n_tx = int(pilots.X.size());
  if (sigma_h_freq2 <= 0.0 || k <= 0.0)
    throw std::invalid_argument("bussgang_subcarrier_estimate: bad scalar parameters");

  const CMat f = dft_matrix(n);
  std::vector<CMat> yf(y_time.size());
  for (int nr = 0; nr < n_rx; ++nr) yf[std::size_t(nr)] = f * y_time[std::size_t(nr)];

  FrequencyResponse fr;
  fr.n_rx = n_rx;
  fr.n_tx = n_tx;
  fr.H.resize(n, Eigen::Index(n_rx) * n_tx);
  CMat xn(n_tx, t_blocks), yn(n_rx, t_blocks);
  for (int sc = 0; sc < n; ++sc) {
    for (int nt = 0; nt < n_tx; ++nt) xn.row(nt) = pilots.X[std::size_t(nt)].row(sc);
    for (int nr = 0; nr < n_rx; ++nr) yn.row(nr) = yf[std::size_t(nr)].row(sc);
    CMat gram = xn * xn.adjoint();
    gram.diagonal().array() += noise_var_eff / sigma_h_freq2;
    const CMat hn = (1.0 / k) * yn * xn.adjoint() * gram.inverse();
    for (int nr = 0; nr < n_rx; ++nr)
      for (int nt = 0; nt < n_tx; ++nt) fr.H(sc, Eigen::Index(nr) * n_tx + nt) = hn(nr, nt);
  }
  return fr;
}

CMat bussgang_subcarrier_estimate_taps(const std::vector<CMat>& y_time, const PilotBlock& pilots,
                                       double k, double noise_var_eff, double sigma_h_comb2,
                                       int n_taps) {
  const int n_rx = int(y_time.size());
  const int n = int(y_time[0].rows());
  const int n_tx = int(pilots.X.size());
  if (int(pilots.antenna_shift.size()) != n_tx)
    throw std::invalid_argument("bussgang_subcarrier_estimate_taps: pilots carry no shift info");

  // Antenna 0 has shift 0, so its pilot matrix is the shared base; the
  // combined response seen per subcarrier is sum_nt H_nt exp(-2pi j n s_nt/N).
  PilotBlock combined;
  combined.waveform = pilots.waveform;
  combined.symbol_power = pilots.symbol_power;
  combined.X = {pilots.X[0]};
  combined.antenna_shift = {0};
  const FrequencyResponse h_eff =
      bussgang_subcarrier_estimate(y_time, combined, k, noise_var_eff, sigma_h_comb2);

  CMat taps(n_taps, Eigen::Index(n_rx) * n_tx);
  CVec derotated(n);
  const CMat fnl = dft_tall(n, n_taps);
  for (int nr = 0; nr < n_rx; ++nr)
    for (int nt = 0; nt < n_tx; ++nt) {
      const int shift = pilots.antenna_shift[std::size_t(nt)];
      for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * double((long(i) * shift) % n) / double(n);
        derotated[i] = h_eff.H(i, nr) * Complex(std::cos(ang), std::sin(ang));
      }
      taps.col(Eigen::Index(nr) * n_tx + nt) = fnl.adjoint() * derotated / double(n);
    }
  return taps;
}

SubcarrierEqualizeResult bussgang_subcarrier_equalize(const std::vector<CMat>& y_time,
                                                      const FrequencyResponse& h_hat,
                                                      const RVec& k_gain, const RVec& eta_var,
                                                      double amplitude) {
  const int n_rx = int(y_time.size());
  const int n = int(y_time[0].rows());
  const int m = int(y_time[0].cols());
  const int n_tx = h_hat.n_tx;

  const CMat f = dft_matrix(n);
  std::vector<CMat> yf(y_time.size());
  for (int nr = 0; nr < n_rx; ++nr) yf[std::size_t(nr)] = f * y_time[std::size_t(nr)];

  SubcarrierEqualizeResult res;
  res.x_hat.resize(Eigen::Index(n) * n_tx, m);
  res.residual_var.resize(Eigen::Index(n) * n_tx);

  const RVec wrow = eta_var.cwiseSqrt().cwiseInverse();  // per-antenna noise whitening
  CMat gw(n_rx, n_tx), yn(n_rx, m);
  for (int sc = 0; sc < n; ++sc) {
    for (int nr = 0; nr < n_rx; ++nr) {
      for (int nt = 0; nt < n_tx; ++nt)
        gw(nr, nt) = wrow[nr] * k_gain[nr] * amplitude * h_hat.H(sc, h_hat.pair_index(nr, nt));
      yn.row(nr) = wrow[nr] * yf[std::size_t(nr)].row(sc);
    }
    CMat gram = gw.adjoint() * gw + CMat::Identity(n_tx, n_tx);
    const CMat ginv = gram.inverse();
    const CMat xhat = ginv * gw.adjoint() * yn;
    for (int nt = 0; nt < n_tx; ++nt) {
      res.x_hat.row(Eigen::Index(nt) * n + sc) = xhat.row(nt);
      res.residual_var[Eigen::Index(nt) * n + sc] = ginv(nt, nt).real();
    }
  }
  return res;
}

}  // namespace qmimo
