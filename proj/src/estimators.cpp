#include "qmimo/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "qmimo/special.hpp"

namespace qmimo {

Method method_from_string(const std::string& name) {
  if (name == "em") return Method::kEm;
  if (name == "gamp") return Method::kGamp;
  if (name == "bussgang" || name == "buss") return Method::kBussgang;
  if (name == "ignoring" || name == "ign") return Method::kIgnoring;
  throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kEm: return "em";
    case Method::kGamp: return "gamp";
    case Method::kBussgang: return "bussgang";
    case Method::kIgnoring: return "ignoring";
  }
  return "?";
}

MmseMultiplier MmseMultiplier::build(const CMat& a, const RVec& noise_var, const RVec& rhh_diag,
                                     double variance_floor) {
  const Eigen::Index p = a.cols();
  MmseMultiplier m;
  const RVec w = noise_var.cwiseInverse();
  const CMat ahw = a.adjoint() * w.asDiagonal();
  CMat g = ahw * a;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double prior = rhh_diag.size() == 1 ? rhh_diag[0] : rhh_diag[i];
    g(i, i) += 1.0 / std::max(prior, variance_floor);
  }
  Eigen::LLT<CMat> llt(g);
  if (llt.info() != Eigen::Success) {
    g.diagonal().array() += variance_floor * g.diagonal().real().mean();
    llt.compute(g);
    m.regularized = true;
  }
  m.B = llt.solve(ahw);
  const CMat ginv = llt.solve(CMat::Identity(p, p));
  m.posterior_var = ginv.diagonal().real();
  return m;
}

// --- EM ----------------------------------------------------------------------

Complex em_conditional_mean(Complex y, Complex z0, double noise_var) {
  const double s = std::sqrt(noise_var) * M_SQRT1_2;  // per-component std
  const double eta_re = y.real() * z0.real() / s;
  const double eta_im = y.imag() * z0.imag() / s;
  return z0 + Complex(s * y.real() * pdf_over_cdf(eta_re), s * y.imag() * pdf_over_cdf(eta_im));
}

namespace {

// Least-squares init (A^H A)^{-1} A^H Y; falls back to a small ridge when the
// Gram is numerically singular.
CMat ls_init(const CMat& a, const CMat& y, bool& regularized) {
  CMat gram = a.adjoint() * a;
  Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success) {
    gram.diagonal().array() += 1e-6 * gram.diagonal().real().mean() * double(gram.rows());
    llt.compute(gram);
    regularized = true;
  }
  return llt.solve(a.adjoint() * y);
}

}  // namespace

BatchEstimate em_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                const MmseMultiplier& mmse, const SolverOptions& opts) {
  const Eigen::Index k = model.rows(), p = model.cols(), r = y.cols();
  BatchEstimate out;
  out.iterations.assign(std::size_t(r), 0);
  out.converged.assign(std::size_t(r), false);
  out.regularized = mmse.regularized;

  CMat h = ls_init(model.A, y, out.regularized);
  RVec comp_std = (0.5 * model.noise_var).cwiseSqrt();

  CMat z(k, r), zhat(k, r), h_new(p, r);
  std::vector<bool> done(std::size_t(r), false);
  int active = int(r);
  long iter_cmuls = 0;
  for (int it = 1; it <= opts.max_iters && active > 0; ++it) {
    z.noalias() = model.A * h;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (done[std::size_t(j)]) continue;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double s = comp_std[i];
        const Complex yij = y(i, j), zij = z(i, j);
        zhat(i, j) = zij + Complex(s * yij.real() * pdf_over_cdf(yij.real() * zij.real() / s),
                                   s * yij.imag() * pdf_over_cdf(yij.imag() * zij.imag() / s));
      }
    }
    h_new.noalias() = mmse.B * zhat;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (done[std::size_t(j)]) {
        h_new.col(j) = h.col(j);
        continue;
      }
      iter_cmuls += 2 * k * p;
      out.iterations[std::size_t(j)] = it;
      const double change = (h_new.col(j) - h.col(j)).squaredNorm();
      if (change < opts.eps * h_new.col(j).squaredNorm()) {
        out.converged[std::size_t(j)] = true;
        done[std::size_t(j)] = true;
        --active;
      }
    }
    h.swap(h_new);
  }
  out.estimates = std::move(h);
  out.flops_estimate = double(iter_cmuls);
  return out;
}

EstimateReport em_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag,
                           const SolverOptions& opts) {
  model.validate();
  const MmseMultiplier mmse =
      MmseMultiplier::build(model.A, model.noise_var, rhh_diag, opts.variance_floor);
  const BatchEstimate b = em_estimate_batch(model, model.y, mmse, opts);
  EstimateReport rep;
  rep.estimate = b.estimates.col(0);
  rep.iterations = b.iterations[0];
  rep.converged = b.converged[0];
  rep.flops_estimate = b.flops_estimate;
  rep.regularized = b.regularized;
  return rep;
}

// --- GAMP ---------------------------------------------------------------------

void gamp_gin_gaussian(Complex r, double tau_r, double sigma_x2, Complex& g, double& tau_x) {
  const double denom = sigma_x2 + tau_r;
  g = (sigma_x2 / denom) * r;
  tau_x = sigma_x2 * tau_r / denom;
}

void gamp_gin_discrete(Complex r, double tau_r, const Prior& prior, Complex& g, double& tau_x) {
  const Eigen::Index n = prior.points.size();
  if (n > 64) throw std::invalid_argument("gamp_gin_discrete: constellation too large");
  // Log-domain weights, normalized by the max exponent for stability.
  double max_e = -std::numeric_limits<double>::infinity();
  double e[64];
  for (Eigen::Index a = 0; a < n; ++a) {
    e[a] = -std::norm(r - prior.points[a]) / tau_r + std::log(prior.probs[a]);
    max_e = std::max(max_e, e[a]);
  }
  double wsum = 0.0, p2 = 0.0;
  Complex mean(0.0, 0.0);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double w = std::exp(e[a] - max_e);
    wsum += w;
    mean += w * prior.points[a];
    p2 += w * std::norm(prior.points[a]);
  }
  g = mean / wsum;
  tau_x = std::max(p2 / wsum - std::norm(g), 0.0);
}

void gamp_gout_real(double p, double y, double tau_p, double noise_var, double& g,
                    double& neg_dg) {
  const double denom = noise_var + tau_p;
  const double scale = M_SQRT2 / std::sqrt(denom);
  const double eta = y * p * scale;
  g = y * scale * pdf_over_cdf(eta);
  neg_dg = (2.0 / denom) * pdf_over_cdf_slope(eta);
}

namespace {

inline void gamp_gout(Complex p, Complex y, double tau_p, double noise_var, Complex& s,
                      double& tau_s) {
  double gr, gi, dr, di;
  gamp_gout_real(p.real(), y.real(), tau_p, noise_var, gr, dr);
  gamp_gout_real(p.imag(), y.imag(), tau_p, noise_var, gi, di);
  s = Complex(gr, gi);
  tau_s = dr + di;
}

}  // namespace

BatchEstimate gamp_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                  const Prior& prior, RMat* tau_x_out,
                                  const SolverOptions& opts) {
  const Eigen::Index k = model.rows(), p = model.cols(), r = y.cols();
  const RMat a2 = model.A.cwiseAbs2();
  const double beta = opts.damping;
  const double floor = opts.variance_floor;

  BatchEstimate out;
  out.iterations.assign(std::size_t(r), 0);
  out.converged.assign(std::size_t(r), false);

  CMat x = CMat::Zero(p, r), s = CMat::Zero(k, r);
  RMat tau_x(p, r);
  for (Eigen::Index i = 0; i < p; ++i)
    tau_x.row(i).setConstant(prior.kind == Prior::Kind::kGaussian
                                 ? std::max(prior.var_at(i), floor)
                                 : prior.mean_power());

  CMat x_old(p, r), pm(k, r), s_new(k, r), rm(p, r);
  RMat tau_p(k, r), tau_s(k, r), tau_r(p, r);
  std::vector<bool> done(std::size_t(r), false);
  int active = int(r);
  long iter_cmuls = 0;

  for (int it = 1; it <= opts.max_iters && active > 0; ++it) {
    x_old = x;
    // Output linear step: tau_p = A2 tau_x, p = A x - (1/2) tau_p . s.
    tau_p.noalias() = a2 * tau_x;
    pm.noalias() = model.A * x;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (done[std::size_t(j)]) continue;
      for (Eigen::Index i = 0; i < k; ++i) {
        tau_p(i, j) = std::max(tau_p(i, j), floor);
        pm(i, j) -= 0.5 * tau_p(i, j) * s(i, j);
        gamp_gout(pm(i, j), y(i, j), tau_p(i, j), model.noise_var[i], s_new(i, j), tau_s(i, j));
        s(i, j) = beta * s_new(i, j) + (1.0 - beta) * s(i, j);
      }
    }
    // Input linear step: tau_r = 4 / (A2^T tau_s), r = x + (1/2) tau_r . (A^H s).
    tau_r.noalias() = a2.transpose() * tau_s;
    rm.noalias() = model.A.adjoint() * s;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (done[std::size_t(j)]) continue;
      for (Eigen::Index i = 0; i < p; ++i) {
        const double tr = 4.0 / std::max(tau_r(i, j), floor);
        Complex g;
        double tx;
        const Complex ri = x(i, j) + 0.5 * tr * rm(i, j);
        if (prior.kind == Prior::Kind::kGaussian)
          gamp_gin_gaussian(ri, tr, std::max(prior.var_at(i), floor), g, tx);
        else
          gamp_gin_discrete(ri, tr, prior, g, tx);
        x(i, j) = beta * g + (1.0 - beta) * x_old(i, j);
        tau_x(i, j) = std::max(tx, floor);
      }
    }
    for (Eigen::Index j = 0; j < r; ++j) {
      if (done[std::size_t(j)]) continue;
      iter_cmuls += 4 * k * p;
      out.iterations[std::size_t(j)] = it;
      if (!x.col(j).allFinite()) {
        x.col(j) = x_old.col(j);  // diverged; keep last finite iterate
        done[std::size_t(j)] = true;
        --active;
        continue;
      }
      const double change = (x.col(j) - x_old.col(j)).squaredNorm();
      if (change < opts.eps * x.col(j).squaredNorm()) {
        out.converged[std::size_t(j)] = true;
        done[std::size_t(j)] = true;
        --active;
      }
    }
  }
  out.estimates = std::move(x);
  out.flops_estimate = double(iter_cmuls);
  if (tau_x_out) *tau_x_out = std::move(tau_x);
  return out;
}

EstimateReport gamp_estimate(const QuantizedLinearModel& model, const Prior& prior,
                             const SolverOptions& opts) {
  model.validate();
  const BatchEstimate b = gamp_estimate_batch(model, model.y, prior, nullptr, opts);
  EstimateReport rep;
  rep.estimate = b.estimates.col(0);
  rep.iterations = b.iterations[0];
  rep.converged = b.converged[0];
  rep.flops_estimate = b.flops_estimate;
  return rep;
}

// --- Ignoring ------------------------------------------------------------------

BatchEstimate ignoring_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                      const MmseMultiplier& mmse) {
  BatchEstimate out;
  out.estimates.noalias() = mmse.B * y;
  out.iterations.assign(std::size_t(y.cols()), 1);
  out.converged.assign(std::size_t(y.cols()), true);
  out.flops_estimate = double(model.rows()) * double(model.cols()) * double(y.cols());
  out.regularized = mmse.regularized;
  return out;
}

EstimateReport ignoring_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag) {
  model.validate();
  const MmseMultiplier mmse = MmseMultiplier::build(model.A, model.noise_var, rhh_diag);
  const BatchEstimate b = ignoring_estimate_batch(model, model.y, mmse);
  EstimateReport rep;
  rep.estimate = b.estimates.col(0);
  rep.iterations = 1;
  rep.converged = true;
  rep.flops_estimate = b.flops_estimate;
  rep.regularized = b.regularized;
  return rep;
}

// --- Equalization dispatch -------------------------------------------------------

EqualizeResult equalize(const QuantizedLinearModel& model, const CMat& y, Method method,
                        const Prior& constellation_prior, const SolverOptions& opts) {
  const Eigen::Index p = model.cols(), m = y.cols();
  if (std::abs(constellation_prior.mean_power() - 1.0) > 1e-9)
    throw std::invalid_argument("equalize: constellation prior must have unit average power");

  EqualizeResult res;
  const RVec unit = RVec::Ones(p);
  if (method == Method::kEm || method == Method::kIgnoring) {
    const MmseMultiplier mmse =
        MmseMultiplier::build(model.A, model.noise_var, unit, opts.variance_floor);
    const BatchEstimate b = method == Method::kEm ? em_estimate_batch(model, y, mmse, opts)
                                                  : ignoring_estimate_batch(model, y, mmse);
    res.x_hat = b.estimates;
    res.residual_var = mmse.posterior_var.replicate(1, m);
    res.flops = b.flops_estimate;
    for (std::size_t j = 0; j < b.iterations.size(); ++j) {
      res.mean_iterations += b.iterations[j];
      res.unconverged += b.converged[j] ? 0 : 1;
    }
    res.mean_iterations /= double(m);
  } else if (method == Method::kGamp) {
    RMat tau_x;
    const BatchEstimate b = gamp_estimate_batch(model, y, constellation_prior, &tau_x, opts);
    res.x_hat = b.estimates;
    // Per-symbol mean posterior variance: per-entry tau_x from an unconverged
    // column can be overconfident, which poisons the soft decoder.
    res.residual_var = tau_x.colwise().mean().replicate(p, 1);
    res.flops = b.flops_estimate;
    for (std::size_t j = 0; j < b.iterations.size(); ++j) {
      res.mean_iterations += b.iterations[j];
      res.unconverged += b.converged[j] ? 0 : 1;
    }
    res.mean_iterations /= double(m);
  } else {
    const BussgangModel decomp = bussgang_decompose(model, unit);
    const BussgangSolver solver = BussgangSolver::build(decomp, unit, opts.variance_floor);
    const BatchEstimate b = bussgang_estimate_batch(model, y, solver);
    res.x_hat = b.estimates;
    res.residual_var = solver.posterior_var.replicate(1, m);
    res.flops = b.flops_estimate;
    res.mean_iterations = 1.0;
  }
  return res;
}

}  // namespace qmimo
