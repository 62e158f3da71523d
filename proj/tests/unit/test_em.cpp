#include <doctest.h>

#include <cmath>

#include "qmimo/estimators.hpp"
#include "qmimo/rng.hpp"

using namespace qmimo;

TEST_SUITE_BEGIN("em");

namespace {

// Independent oracle for E{z | y, z0}: tensor Simpson integration of the
// bivariate Gaussian over the quadrant Q^{-1}(y) - z0, limits placed at the
// quadrant boundary so the integrand stays smooth.
Complex conditional_mean_quadrature(Complex y, Complex z0, double noise_var) {
  const double s = std::sqrt(noise_var / 2.0);
  const int n_nodes = 1200;
  const double span = 10.0 * s;

  auto limits = [&](double ysign, double z0c, double& lo, double& hi) {
    if (ysign > 0) {
      lo = -z0c;
      hi = std::max(-z0c, 0.0) + span;
    } else {
      hi = -z0c;
      lo = std::min(-z0c, 0.0) - span;
    }
  };
  double lo_r, hi_r, lo_i, hi_i;
  limits(y.real(), z0.real(), lo_r, hi_r);
  limits(y.imag(), z0.imag(), lo_i, hi_i);

  auto pdf = [&](double w) { return std::exp(-w * w / (2 * s * s)); };
  auto simpson_weights = [&](int i, int n) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };

  const double hr = (hi_r - lo_r) / n_nodes, hi_step = (hi_i - lo_i) / n_nodes;
  double mass = 0, mom_r = 0, mom_i = 0;
  for (int i = 0; i <= n_nodes; ++i) {
    const double wr = lo_r + hr * i;
    const double fr = pdf(wr) * simpson_weights(i, n_nodes);
    for (int j = 0; j <= n_nodes; ++j) {
      const double wi = lo_i + hi_step * j;
      const double f = fr * pdf(wi) * simpson_weights(j, n_nodes);
      mass += f;
      mom_r += f * wr;
      mom_i += f * wi;
    }
  }
  return z0 + Complex(mom_r / mass, mom_i / mass);
}

QuantizedLinearModel toy_model(int k, int p, double noise_var, std::uint64_t seed, CVec* h_out) {
  const RngStream rng(seed, 0, 0);
  QuantizedLinearModel m;
  m.A.resize(k, p);
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < k; ++r) m.A(r, c) = rng.cgauss(std::uint64_t(c) * k + std::uint64_t(r));
  m.noise_var = RVec::Constant(k, noise_var);
  CVec h(p);
  for (int i = 0; i < p; ++i) h[i] = RngStream(seed, 1, 0).cgauss(std::uint64_t(i));
  m.y = simulate_observation(m.A, h, m.noise_var, RngStream(seed, 2, 0));
  if (h_out) *h_out = h;
  return m;
}

}  // namespace

TEST_CASE("conditional mean closed form at eta = 0") {
  // y = 1+j, z0 = 0, sigma^2 = 2: w_hat = phi(0)/Phi(0) * (1+j) per component scale 1.
  const Complex got = em_conditional_mean(Complex(1, 1), Complex(0, 0), 2.0);
  CHECK(got.real() == doctest::Approx(0.7978845608028654).epsilon(1e-12));
  CHECK(got.imag() == doctest::Approx(0.7978845608028654).epsilon(1e-12));
}

TEST_CASE("conditional mean vanishing correction for consistent high-confidence samples") {
  // Large positive eta: observation agrees with the prediction, correction -> 0.
  const Complex got = em_conditional_mean(Complex(1, -1), Complex(30, -30), 2.0);
  CHECK(std::abs(got.real() - 30.0) < 1e-12);
  CHECK(std::abs(got.imag() + 30.0) < 1e-12);
}

TEST_CASE("conditional mean matches 2-D quadrature on random scalars") {
  const RngStream rng(7777, 0, 0);
  for (int c = 0; c < 20; ++c) {
    const Complex z0 = 1.5 * rng.cgauss(std::uint64_t(c));
    const Complex y = quantize(rng.cgauss(100 + std::uint64_t(c)));
    const double noise_var = 0.5 + 2.5 * rng.uniform(200 + std::uint64_t(c));
    const Complex expect = conditional_mean_quadrature(y, z0, noise_var);
    const Complex got = em_conditional_mean(y, z0, noise_var);
    CHECK(std::abs(got - expect) < 1e-6);
  }
}

TEST_CASE("EM estimate converges and is deterministic") {
  CVec h;
  const QuantizedLinearModel m = toy_model(64, 4, 1.0, 42, &h);
  const RVec rhh = RVec::Constant(4, 1.0);
  const EstimateReport rep1 = em_estimate(m, rhh);
  const EstimateReport rep2 = em_estimate(m, rhh);
  CHECK(rep1.converged);
  CHECK(rep1.iterations <= 300);
  CHECK((rep1.estimate - rep2.estimate).norm() == 0.0);
  CHECK(rep1.flops_estimate == doctest::Approx(2.0 * rep1.iterations * 64 * 4));

  // The estimate should correlate strongly with the truth at this SNR.
  const double corr = std::abs(rep1.estimate.dot(h)) / (rep1.estimate.norm() * h.norm());
  CHECK(corr > 0.9);
}

TEST_CASE("EM fixed point moves less than the tolerance at convergence") {
  CVec h;
  const QuantizedLinearModel m = toy_model(48, 3, 2.0, 99, &h);
  const RVec rhh = RVec::Constant(3, 1.0);
  SolverOptions opts = SolverOptions::em_defaults();
  const EstimateReport rep = em_estimate(m, rhh, opts);
  REQUIRE(rep.converged);
  // One extra EM sweep changes the estimate by less than eps * ||h||^2.
  const MmseMultiplier mmse = MmseMultiplier::build(m.A, m.noise_var, rhh);
  CVec zhat(m.rows());
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const Complex z0 = (m.A * rep.estimate)(k);
    zhat[k] = em_conditional_mean(m.y[k], z0, m.noise_var[k]);
  }
  const CVec next = mmse.B * zhat;
  CHECK((next - rep.estimate).squaredNorm() < 4.0 * opts.eps * rep.estimate.squaredNorm());
}

TEST_CASE("singular LS init falls back to ridge and flags it") {
  QuantizedLinearModel m;
  m.A.resize(8, 2);
  const RngStream rng(5, 0, 0);
  for (int r = 0; r < 8; ++r) {
    m.A(r, 0) = rng.cgauss(std::uint64_t(r));
    m.A(r, 1) = m.A(r, 0);  // exactly dependent columns
  }
  m.noise_var = RVec::Constant(8, 1.0);
  m.y = simulate_observation(m.A, CVec::Ones(2), m.noise_var, RngStream(5, 1, 0));
  const EstimateReport rep = em_estimate(m, RVec::Constant(2, 1.0));
  CHECK(rep.regularized);
  CHECK(rep.estimate.allFinite());
}

TEST_CASE("ignoring estimator equals the M-step applied to raw observations") {
  CVec h;
  const QuantizedLinearModel m = toy_model(32, 4, 1.0, 31, &h);
  const RVec rhh = RVec::Constant(4, 1.0);
  const EstimateReport rep = ignoring_estimate(m, rhh);
  const MmseMultiplier mmse = MmseMultiplier::build(m.A, m.noise_var, rhh);
  const CVec expect = mmse.B * m.y;
  CHECK((rep.estimate - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(rep.flops_estimate == doctest::Approx(double(32 * 4)));
}

TEST_SUITE_END();
