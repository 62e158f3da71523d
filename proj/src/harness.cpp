#include "qmimo/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "qmimo/constellation.hpp"
#include "qmimo/convcode.hpp"
#include "qmimo/crlb.hpp"

namespace qmimo {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoOverPi = 2.0 / M_PI;

struct MethodPlan {
  std::string est;
  bool perfect = false;
  Method est_method = Method::kEm;  // unused when perfect
  Method eq_method = Method::kEm;
  std::string label;
};

struct PointAccum {
  long n = 0;
  double nmse_sum = 0, nmse_sq = 0;
  double rate_sum = 0, rate_sq = 0;
  long errors = 0, bits = 0;
  double est_iters = 0, eq_iters = 0;
  double flops_est = 0, flops_eq = 0;
};

struct TrialOutput {
  double crlb = kNan;
  std::vector<double> nmse;
  std::vector<long> errors;
  std::vector<double> est_iters, eq_iters, flops_est, flops_eq;
  long bits = 0;
};

// Everything fixed for one (waveform, snr) grid point: pilots, the shared
// estimation model and the multipliers factored once and reused by all
// trials.
struct PointContext {
  const ExperimentSpec* spec = nullptr;
  SystemConfig cfg;
  std::vector<MethodPlan> methods;
  PilotBlock pilots;
  QuantizedLinearModel est_model;
  RVec rhh_est;        // per-entry prior variance, length L*N_t
  RVec tap_profile;    // length L
  double sigma_norm = 1.0;
  MmseMultiplier mmse_est;
  bool has_mmse = false;
  BussgangSolver buss_est;
  bool has_buss_sc = false;
  double buss_mc_k = 0, buss_mc_sw = 0, buss_mc_sh2 = 0;
  const Constellation* constel = nullptr;
  Prior data_prior;
  std::size_t n_info = 0, n_coded = 0, capacity = 0;
};

void parallel_trials(int begin, int end, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || end - begin <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(workers, end - begin);
  pool.reserve(std::size_t(n));
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CMat unstack_estimates(const CMat& est, int n_rx, int n_tx, int n_taps) {
  CMat taps(n_taps, Eigen::Index(n_rx) * n_tx);
  for (int nr = 0; nr < n_rx; ++nr)
    for (int nt = 0; nt < n_tx; ++nt)
      taps.col(Eigen::Index(nr) * n_tx + nt) = est.col(nr).segment(Eigen::Index(nt) * n_taps, n_taps);
  return taps;
}

// Scalar Bussgang parameters (per real component) for a given per-sample
// complex signal-plus-noise variance.
void scalar_bussgang(double sigma_z2, double noise_var, double& k, double& sw_eff) {
  k = std::sqrt(kTwoOverPi / (0.5 * sigma_z2));
  sw_eff = kTwoOverPi * noise_var / sigma_z2 + (1.0 - kTwoOverPi);
}

PointContext make_point_context(const ExperimentSpec& spec, Waveform wf, double snr_db,
                                const std::vector<MethodPlan>& methods) {
  PointContext ctx;
  ctx.spec = &spec;
  ctx.cfg = spec.base;
  ctx.cfg.waveform = wf;
  ctx.cfg.snr_db = snr_db;
  ctx.cfg.validate();
  if (!ctx.cfg.estimable()) {
    if (spec.strict)
      throw ConfigError("estimability: T*N < L*N_t");
    std::cerr << "warning: T*N < L*N_t, channel estimation is underdetermined\n";
  }
  ctx.methods = methods;
  ctx.pilots = gen_orthogonal_pilots(ctx.cfg);
  ctx.est_model = build_estimation_model(ctx.cfg, ctx.pilots);
  ctx.tap_profile = channel_tap_profile(spec.channel, ctx.cfg);
  ctx.sigma_norm = ctx.tap_profile.mean();
  ctx.rhh_est.resize(Eigen::Index(ctx.cfg.n_tx) * ctx.cfg.n_taps);
  for (int nt = 0; nt < ctx.cfg.n_tx; ++nt)
    ctx.rhh_est.segment(Eigen::Index(nt) * ctx.cfg.n_taps, ctx.cfg.n_taps) = ctx.tap_profile;
  ctx.est_model.prior = Prior::gaussian(ctx.rhh_est);

  bool need_mmse = false, need_buss = false;
  for (const auto& m : methods) {
    if (m.est == "em" || m.est == "ignoring") need_mmse = true;
    if (m.est == "bussgang") need_buss = true;
  }
  if (need_mmse) {
    ctx.mmse_est = MmseMultiplier::build(ctx.est_model.A, ctx.est_model.noise_var, ctx.rhh_est,
                                         spec.em_opts.variance_floor);
    ctx.has_mmse = true;
  }
  if (need_buss) {
    if (wf == Waveform::kSc) {
      const BussgangModel decomp = bussgang_decompose(ctx.est_model, ctx.rhh_est);
      ctx.buss_est = BussgangSolver::build(decomp, ctx.rhh_est, spec.em_opts.variance_floor);
      ctx.has_buss_sc = true;
    } else {
      // Scalar path parameters; sigma_h2 is the per-subcarrier variance of the
      // delay-combined response seen through the shared pilot base.
      const double total_gain = ctx.cfg.n_tx * ctx.tap_profile.sum();
      const double sigma_z2 = ctx.cfg.symbol_power() * total_gain + ctx.cfg.noise_var;
      scalar_bussgang(sigma_z2, ctx.cfg.noise_var, ctx.buss_mc_k, ctx.buss_mc_sw);
      ctx.buss_mc_sh2 = total_gain;
    }
  }

  ctx.constel = &Constellation::get(ctx.cfg.constellation);
  ctx.data_prior = Prior::discrete_uniform(ctx.constel->points);
  ctx.capacity = std::size_t(ctx.cfg.n_data_symbols) * std::size_t(ctx.cfg.n_sub) *
                 std::size_t(ctx.cfg.n_tx) * std::size_t(ctx.constel->bits_per_symbol);
  ctx.n_info = convcode::info_length_for(ctx.capacity);
  ctx.n_coded = convcode::coded_length(ctx.n_info);
  return ctx;
}

// One full Monte Carlo trial: channel draw, pilot observation, one estimate
// and (optionally) one coded block per method, with common randomness across
// methods.
TrialOutput run_one_trial(const PointContext& ctx, int trial) {
  const ExperimentSpec& spec = *ctx.spec;
  const SystemConfig& cfg = ctx.cfg;
  const int n_rx = cfg.n_rx, n_tx = cfg.n_tx, n_taps = cfg.n_taps, n = cfg.n_sub;
  const std::size_t n_methods = ctx.methods.size();

  TrialOutput out;
  out.nmse.assign(n_methods, 0.0);
  out.errors.assign(n_methods, 0);
  out.est_iters.assign(n_methods, 0.0);
  out.eq_iters.assign(n_methods, 0.0);
  out.flops_est.assign(n_methods, 0.0);
  out.flops_eq.assign(n_methods, 0.0);

  const RngStream chan_rng(spec.seed, kRoleChannel, std::uint32_t(trial));
  const ChannelRealization channel = gen_channel(spec.channel, cfg, chan_rng);

  // Pilot-phase observations, one column per receive antenna.
  const Eigen::Index k_est = ctx.est_model.rows();
  CMat y_est(k_est, n_rx);
  for (int nr = 0; nr < n_rx; ++nr) {
    const RngStream noise_rng(spec.seed, kRolePilotNoise + std::uint32_t(nr),
                              std::uint32_t(trial));
    y_est.col(nr) = simulate_observation(ctx.est_model.A, channel.stack_for_rx(nr),
                                         ctx.est_model.noise_var, noise_rng);
  }

  const double norm = double(n_rx) * n_tx * n_taps * ctx.sigma_norm;
  if (spec.with_crlb) {
    double acc = 0.0;
    for (int nr = 0; nr < n_rx; ++nr) acc += crlb_trace(ctx.est_model, channel.stack_for_rx(nr));
    out.crlb = acc / norm;
  }

  // Channel estimation per method.
  std::vector<CMat> taps_hat(n_methods);
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    const MethodPlan& plan = ctx.methods[mi];
    if (plan.perfect) {
      taps_hat[mi] = channel.taps;
      continue;
    }
    BatchEstimate est;
    switch (plan.est_method) {
      case Method::kEm:
        est = em_estimate_batch(ctx.est_model, y_est, ctx.mmse_est, spec.em_opts);
        break;
      case Method::kIgnoring:
        est = ignoring_estimate_batch(ctx.est_model, y_est, ctx.mmse_est);
        break;
      case Method::kGamp:
        est = gamp_estimate_batch(ctx.est_model, y_est, ctx.est_model.prior, nullptr,
                                  spec.gamp_opts);
        break;
      case Method::kBussgang: {
        if (cfg.waveform == Waveform::kSc) {
          est = bussgang_estimate_batch(ctx.est_model, y_est, ctx.buss_est);
        } else {
          std::vector<CMat> y_time;
          y_time.resize(std::size_t(n_rx));
          for (int nr = 0; nr < n_rx; ++nr)
            y_time[std::size_t(nr)] = y_est.col(nr).reshaped(n, cfg.n_pilot_blocks);
          taps_hat[mi] = bussgang_subcarrier_estimate_taps(
              y_time, ctx.pilots, ctx.buss_mc_k, ctx.buss_mc_sw, ctx.buss_mc_sh2, n_taps);
          out.est_iters[mi] = 1.0;
          out.flops_est[mi] = double(n_rx) * n_tx * n * cfg.n_pilot_blocks;
        }
        break;
      }
    }
    if (taps_hat[mi].size() == 0) {
      taps_hat[mi] = unstack_estimates(est.estimates, n_rx, n_tx, n_taps);
      double it = 0;
      for (int v : est.iterations) it += v;
      out.est_iters[mi] = it / double(n_rx);
      out.flops_est[mi] = est.flops_estimate;
    }
    out.nmse[mi] = compute_nmse(taps_hat[mi], channel.taps, ctx.sigma_norm);
  }

  if (!spec.with_ber) return out;

  // Transmit one coded coherence block through the true channel.
  const QuantizedLinearModel true_eq = build_equalization_model(cfg, channel);
  const int m_sym = cfg.n_data_symbols;
  const int bps = ctx.constel->bits_per_symbol;
  const Eigen::Index p_eq = true_eq.cols();

  const RngStream bits_rng(spec.seed, kRoleDataBits, std::uint32_t(trial));
  std::vector<std::uint8_t> info(ctx.n_info);
  for (std::size_t i = 0; i < info.size(); ++i) info[i] = std::uint8_t(bits_rng.bit(i));
  std::vector<std::uint8_t> coded = convcode::encode(info);
  coded.resize(ctx.capacity, 0);  // pad up to the block's bit capacity
  const int il_rows = m_sym, il_cols = int(ctx.capacity) / m_sym;
  const std::vector<std::uint8_t> tx_bits = interleave(coded, il_rows, il_cols);
  const CVec symbols = map_bits(tx_bits, *ctx.constel);
  const CMat x_tx = symbols.reshaped(p_eq, m_sym);

  CMat y_eq(true_eq.rows(), m_sym);
  {
    CMat z = true_eq.A * x_tx;
    for (int nr = 0; nr < n_rx; ++nr) {
      const RngStream noise_rng(spec.seed, kRoleDataNoise + std::uint32_t(nr),
                                std::uint32_t(trial));
      for (int m = 0; m < m_sym; ++m)
        for (int i = 0; i < n; ++i) {
          const Eigen::Index row = Eigen::Index(nr) * n + i;
          z(row, m) += std::sqrt(cfg.noise_var) *
                       noise_rng.cgauss(std::uint64_t(m) * std::uint64_t(n) + std::uint64_t(i));
        }
    }
    y_eq = quantize(z);
  }
  out.bits = long(ctx.n_info);

  std::vector<double> llrs(ctx.capacity), llr_sym;
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    const MethodPlan& plan = ctx.methods[mi];
    ChannelRealization ch_hat;
    const ChannelRealization* ch_use = &channel;
    if (!plan.perfect) {
      ch_hat = channel;
      ch_hat.taps = taps_hat[mi];
      ch_use = &ch_hat;
    }

    CMat x_hat;
    RMat residual;
    if (plan.eq_method == Method::kBussgang && cfg.waveform == Waveform::kOfdm) {
      // Subcarrier-wise linear path; per-antenna scalar Bussgang parameters
      // from the estimated channel energy.
      std::vector<CMat> y_time;
          y_time.resize(std::size_t(n_rx));
      for (int nr = 0; nr < n_rx; ++nr)
        y_time[std::size_t(nr)] = y_eq.middleRows(Eigen::Index(nr) * n, n);
      RVec k_gain(n_rx), eta_var(n_rx);
      for (int nr = 0; nr < n_rx; ++nr) {
        double energy = 0.0;
        for (int nt = 0; nt < n_tx; ++nt) energy += ch_use->tap(nr, nt).squaredNorm();
        const double sigma_z2 = cfg.symbol_power() * energy + cfg.noise_var;
        double k, sw;
        scalar_bussgang(sigma_z2, cfg.noise_var, k, sw);
        k_gain[nr] = k;
        eta_var[nr] = 2.0 * sw;  // complex effective noise variance
      }
      const FrequencyResponse fr = frequency_response(*ch_use, n);
      const SubcarrierEqualizeResult sub = bussgang_subcarrier_equalize(
          y_time, fr, k_gain, eta_var, std::sqrt(cfg.symbol_power()));
      x_hat = sub.x_hat;
      residual = sub.residual_var.replicate(1, m_sym);
      out.eq_iters[mi] = 1.0;
      out.flops_eq[mi] = double(n_rx) * n_tx * n * m_sym;
    } else {
      const QuantizedLinearModel eq_model =
          plan.perfect ? true_eq : build_equalization_model(cfg, ch_hat);
      const SolverOptions& opts =
          plan.eq_method == Method::kGamp ? spec.gamp_opts : spec.em_opts;
      EqualizeResult eq = equalize(eq_model, y_eq, plan.eq_method, ctx.data_prior, opts);
      x_hat = std::move(eq.x_hat);
      residual = std::move(eq.residual_var);
      out.eq_iters[mi] = eq.mean_iterations;
      out.flops_eq[mi] = eq.flops;
    }

    for (int m = 0; m < m_sym; ++m) {
      demap_soft(x_hat.col(m), residual.col(m), *ctx.constel, llr_sym);
      std::copy(llr_sym.begin(), llr_sym.end(),
                llrs.begin() + std::size_t(m) * std::size_t(p_eq) * std::size_t(bps));
    }
    std::vector<double> llr_coded = deinterleave(llrs, il_rows, il_cols);
    llr_coded.resize(ctx.n_coded);  // drop pad positions
    const std::vector<std::uint8_t> decoded = convcode::viterbi_decode(llr_coded, ctx.n_info);
    long errs = 0;
    for (std::size_t i = 0; i < info.size(); ++i) errs += decoded[i] != info[i];
    out.errors[mi] = errs;
  }
  return out;
}

std::string method_label(const ExperimentSpec& spec, const MethodPlan& plan) {
  if (!spec.with_ber) return plan.est;
  return plan.est + "+" + to_string(plan.eq_method);
}

}  // namespace

void ExperimentSpec::validate() const {
  base.validate();
  if (est_methods.empty()) throw ConfigError("est_methods must not be empty");
  if (snr_db.empty()) throw ConfigError("snr_db grid must not be empty");
  if (waveforms.empty()) throw ConfigError("waveform list must not be empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  for (const auto& m : est_methods)
    if (m != "perfect") method_from_string(m);  // throws on unknown names
  if (eq_method != "same") method_from_string(eq_method);
  if (eq_method == "same")
    for (const auto& m : est_methods)
      if (m == "perfect")
        throw ConfigError("eq_method=same is undefined for est_method=perfect");
}

double compute_nmse(const CMat& taps_hat, const CMat& taps_true, double sigma_h_sq) {
  if (taps_hat.rows() != taps_true.rows() || taps_hat.cols() != taps_true.cols())
    throw std::invalid_argument("compute_nmse: shape mismatch");
  const double denom = double(taps_true.size()) * sigma_h_sq;
  return (taps_hat - taps_true).squaredNorm() / denom;
}

const PointResult& ExperimentResult::at(Waveform wf, const std::string& est, double snr) const {
  for (const auto& p : points) {
    const std::string est_part = p.method.substr(0, p.method.find('+'));
    if (p.waveform == wf && est_part == est && std::abs(p.snr_db - snr) < 1e-9) return p;
  }
  throw std::out_of_range("ExperimentResult::at: no such point");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const int workers =
      spec.workers > 0 ? spec.workers : std::max(1u, std::thread::hardware_concurrency());

  std::vector<MethodPlan> methods;
  for (const auto& name : spec.est_methods) {
    MethodPlan plan;
    plan.est = name;
    plan.perfect = name == "perfect";
    if (!plan.perfect) plan.est_method = method_from_string(name);
    plan.eq_method = spec.eq_method == "same" ? plan.est_method
                                              : method_from_string(spec.eq_method);
    methods.push_back(plan);
  }

  ExperimentResult result;
  result.spec = spec;
  for (const Waveform wf : spec.waveforms) {
    for (const double snr : spec.snr_db) {
      const PointContext ctx = make_point_context(spec, wf, snr, methods);
      std::vector<PointAccum> acc(methods.size());
      double crlb_sum = 0.0;
      long done = 0;
      std::vector<TrialOutput> outputs(std::size_t(spec.batch));
      while (done < spec.trials) {
        const int batch_n = int(std::min<long>(spec.batch, spec.trials - done));
        parallel_trials(0, batch_n, workers,
                        [&](int i) { outputs[std::size_t(i)] = run_one_trial(ctx, int(done) + i); });
        for (int i = 0; i < batch_n; ++i) {
          const TrialOutput& t = outputs[std::size_t(i)];
          if (spec.with_crlb) crlb_sum += t.crlb;
          for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            PointAccum& a = acc[mi];
            a.n += 1;
            a.nmse_sum += t.nmse[mi];
            a.nmse_sq += t.nmse[mi] * t.nmse[mi];
            if (spec.with_ber) {
              const double rate = double(t.errors[mi]) / double(t.bits);
              a.rate_sum += rate;
              a.rate_sq += rate * rate;
              a.errors += t.errors[mi];
              a.bits += t.bits;
            }
            a.est_iters += t.est_iters[mi];
            a.eq_iters += t.eq_iters[mi];
            a.flops_est += t.flops_est[mi];
            a.flops_eq += t.flops_eq[mi];
          }
        }
        done += batch_n;
        if (spec.with_ber && spec.ber_target_errors > 0) {
          long min_err = std::numeric_limits<long>::max();
          for (const auto& a : acc) min_err = std::min(min_err, a.errors);
          if (min_err >= spec.ber_target_errors) break;
        }
      }

      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const PointAccum& a = acc[mi];
        PointResult p;
        p.snr_db = snr;
        p.waveform = wf;
        p.method = method_label(spec, methods[mi]);
        p.trials = a.n;
        const double n = double(a.n);
        p.nmse = a.nmse_sum / n;
        p.nmse_stderr =
            a.n > 1 ? std::sqrt(std::max(0.0, (a.nmse_sq - n * p.nmse * p.nmse) / (n - 1)) / n)
                    : 0.0;
        if (spec.with_ber) {
          p.coded_ber = double(a.errors) / double(a.bits);
          const double mean_rate = a.rate_sum / n;
          p.ber_stderr =
              a.n > 1
                  ? std::sqrt(std::max(0.0, (a.rate_sq - n * mean_rate * mean_rate) / (n - 1)) / n)
                  : 0.0;
          p.bits_simulated = a.bits;
          p.bit_errors = a.errors;
        } else {
          p.coded_ber = kNan;
          p.ber_stderr = kNan;
        }
        p.crlb = spec.with_crlb ? crlb_sum / n : kNan;
        p.est_iterations_mean = a.est_iters / n;
        p.eq_iterations_mean = a.eq_iters / n;
        p.flops_est = a.flops_est;
        p.flops_eq = a.flops_eq;
        result.points.push_back(std::move(p));
      }
    }
  }

  // Emit rows grouped by (waveform, method, snr) in spec order.
  std::vector<PointResult> ordered;
  ordered.reserve(result.points.size());
  for (const Waveform wf : spec.waveforms)
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      for (const double snr : spec.snr_db)
        for (auto& p : result.points)
          if (p.waveform == wf && std::abs(p.snr_db - snr) < 1e-12 &&
              p.method == method_label(spec, methods[mi]))
            ordered.push_back(p);
  result.points = std::move(ordered);
  return result;
}

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string format_csv(const ExperimentResult& result) {
  std::string out = "snr_db,waveform,method,nmse,nmse_stderr,coded_ber,ber_stderr,crlb,trials,seed\n";
  for (const auto& p : result.points) {
    out += fmt_double(p.snr_db) + "," + to_string(p.waveform) + "," + p.method + "," +
           fmt_double(p.nmse) + "," + fmt_double(p.nmse_stderr) + "," + fmt_double(p.coded_ber) +
           "," + fmt_double(p.ber_stderr) + "," + fmt_double(p.crlb) + "," +
           std::to_string(p.trials) + "," + std::to_string(result.spec.seed) + "\n";
  }
  return out;
}

ExperimentResult sweep_and_emit(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.out_csv.empty()) throw ConfigError("no output CSV path configured");
  ExperimentResult result = run_experiment(spec);

  {
    std::ofstream csv(spec.out_csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open CSV output: " + spec.out_csv);
    csv << format_csv(result);
    if (!csv) throw std::runtime_error("write failed: " + spec.out_csv);
  }
  const std::string json_path =
      spec.out_json.empty() ? spec.out_csv + ".json" : spec.out_json;
  {
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw std::runtime_error("cannot open JSON output: " + json_path);
    js << format_json(result);
    if (!js) throw std::runtime_error("write failed: " + json_path);
  }
  return result;
}

}  // namespace qmimo
