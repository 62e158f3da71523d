#pragma once

#include <string>
#include <vector>

#include "qmimo/qlm.hpp"
#include "qmimo/system_models.hpp"
#include "qmimo/types.hpp"

namespace qmimo {

enum class Method { kEm, kGamp, kBussgang, kIgnoring };

Method method_from_string(const std::string& name);
std::string to_string(Method m);

struct SolverOptions {
  int max_iters = 300;
  double eps = 1e-6;        // stop when ||dx||^2 < eps * ||x||^2
  double damping = 1.0;     // applied to the GAMP s and x updates
  double variance_floor = 1e-12;

  // Iteration caps sized so the slow high-SNR EM transient actually reaches
  // its plateau; at low SNR both solvers stop on eps long before the cap.
  static SolverOptions em_defaults() { return {300, 1e-6, 1.0, 1e-12}; }
  static SolverOptions gamp_defaults() { return {100, 1e-6, 0.7, 1e-12}; }
};

struct EstimateReport {
  CVec estimate;
  int iterations = 0;
  bool converged = false;
  double flops_estimate = 0.0;  // complex-multiply count: 2IKP (EM), 4IKP (GAMP), KP (Bussgang)
  bool regularized = false;     // a fallback/ridge path was taken
};

// Batched variant: one report per column of Y (independent right-hand sides
// sharing the sensing matrix and any factored multipliers).
struct BatchEstimate {
  CMat estimates;  // P x R
  std::vector<int> iterations;
  std::vector<bool> converged;
  double flops_estimate = 0.0;
  bool regularized = false;
};

// Factored linear-MMSE multiplier (A^H Rw^-1 A + Rhh^-1)^-1 A^H Rw^-1,
// computed once per model and reused across right-hand sides. Also carries
// the posterior variance diagonal used as the demapper's residual proxy.
struct MmseMultiplier {
  CMat B;              // P x K
  RVec posterior_var;  // complex per-entry posterior variance
  bool regularized = false;

  static MmseMultiplier build(const CMat& a, const RVec& noise_var, const RVec& rhh_diag,
                              double variance_floor = 1e-12);
};

// --- EM-MMSE ---------------------------------------------------------------

EstimateReport em_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag,
                           const SolverOptions& opts = SolverOptions::em_defaults());
BatchEstimate em_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                const MmseMultiplier& mmse,
                                const SolverOptions& opts = SolverOptions::em_defaults());

// Conditional mean E{z | y, z0} of one unquantized sample given its sign
// observation: z0 + w_hat with the truncated-Gaussian noise mean w_hat.
Complex em_conditional_mean(Complex y, Complex z0, double noise_var);

// --- GAMP -------------------------------------------------------------------

// Scalar estimation functions, exposed for oracle checks.
void gamp_gin_gaussian(Complex r, double tau_r, double sigma_x2, Complex& g, double& tau_x);
void gamp_gin_discrete(Complex r, double tau_r, const Prior& prior, Complex& g, double& tau_x);
// Real-part output step; returns g and the negative derivative -dg/dp.
void gamp_gout_real(double p, double y, double tau_p, double noise_var, double& g,
                    double& neg_dg);

EstimateReport gamp_estimate(const QuantizedLinearModel& model, const Prior& prior,
                             const SolverOptions& opts = SolverOptions::gamp_defaults());
BatchEstimate gamp_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                  const Prior& prior, RMat* tau_x_out = nullptr,
                                  const SolverOptions& opts = SolverOptions::gamp_defaults());

// --- Bussgang ---------------------------------------------------------------

// Bussgang linearization of the quantizer: y~ = K z~ + e with e uncorrelated
// with z~, leading to the linear surrogate y~ = B h~ + eta.
struct BussgangModel {
  RVec k_gain;  // diagonal of K (2K)
  RMat r_ee;    // quantization-noise covariance (2K x 2K)
  RMat b;       // K * A~ (2K x 2P)
  RMat r_eta;   // K Rww K^T + Ree
  // i.i.d.-case parameters (per real component): y ~ k z + n, n ~ N(0, sw2).
  double scalar_k = 0.0;
  double scalar_noise_var = 0.0;
};

BussgangModel bussgang_decompose(const QuantizedLinearModel& model, const RVec& rhh_diag);

// Factored real-domain MMSE multiplier for the linearized model.
struct BussgangSolver {
  RMat G;              // 2P x 2K
  RVec posterior_var;  // complex per-entry posterior variance
  bool regularized = false;

  static BussgangSolver build(const BussgangModel& d, const RVec& rhh_diag,
                              double variance_floor = 1e-12);
};

EstimateReport bussgang_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag,
                                 const BussgangModel& decomposition);
BatchEstimate bussgang_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                      const BussgangSolver& solver);

// Subcarrier-wise linear MMSE channel estimation from 1-bit OFDM pilot
// observations under the i.i.d. scalar Bussgang model: FFT the quantized
// time-domain blocks, then per subcarrier
//   H_n = (1/k) Y_n X_n^H (X_n X_n^H + (sw2/sh2) I)^{-1}.
// y_time: one N x T quantized block per receive antenna. sigma_h_freq2 is the
// per-subcarrier channel variance.
FrequencyResponse bussgang_subcarrier_estimate(const std::vector<CMat>& y_time,
                                               const PilotBlock& pilots, double k,
                                               double noise_var_eff, double sigma_h_freq2);

// Subcarrier-wise channel estimation for shift-orthogonal pilots: antennas
// share a base sequence, so each subcarrier carries one scalar unknown (the
// delay-combined response). Estimates it with the scalar form above, then
// de-rotates per antenna and projects onto the first n_taps delays.
// Returns taps, n_taps x (N_r * N_t).
CMat bussgang_subcarrier_estimate_taps(const std::vector<CMat>& y_time, const PilotBlock& pilots,
                                       double k, double noise_var_eff, double sigma_h_comb2,
                                       int n_taps);

// Subcarrier-wise linear MMSE equalization with a known (estimated)
// frequency response; k_gain and eta_var are per receive antenna (complex
// effective noise variance).
struct SubcarrierEqualizeResult {
  CMat x_hat;         // (N*N_t) x M, frequency-domain symbols
  RVec residual_var;  // per entry of a symbol vector
};
SubcarrierEqualizeResult bussgang_subcarrier_equalize(const std::vector<CMat>& y_time,
                                                      const FrequencyResponse& h_hat,
                                                      const RVec& k_gain, const RVec& eta_var,
                                                      double amplitude);

// --- Quantization-ignoring baseline ------------------------------------------

EstimateReport ignoring_estimate(const QuantizedLinearModel& model, const RVec& rhh_diag);
BatchEstimate ignoring_estimate_batch(const QuantizedLinearModel& model, const CMat& y,
                                      const MmseMultiplier& mmse);

// --- Equalization dispatch ---------------------------------------------------

struct EqualizeResult {
  CMat x_hat;         // P x M soft symbol estimates
  RMat residual_var;  // P x M residual-variance proxy for demapping
  double flops = 0.0;
  double mean_iterations = 0.0;
  int unconverged = 0;
};

// Runs the chosen estimator on every symbol vector (column of y). EM,
// Ignoring and Bussgang use a unit-power Gaussian surrogate prior (the
// symbol amplitude is folded into A); GAMP uses the discrete constellation
// prior.
EqualizeResult equalize(const QuantizedLinearModel& model, const CMat& y, Method method,
                        const Prior& constellation_prior, const SolverOptions& opts);

}  // namespace qmimo
