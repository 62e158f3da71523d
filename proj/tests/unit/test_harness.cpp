#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qmimo/channel.hpp"
#include "qmimo/harness.hpp"
#include "qmimo/rng.hpp"

using namespace qmimo;

TEST_SUITE_BEGIN("harness");

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.base.n_sub = 16;
  spec.base.n_rx = 2;
  spec.base.n_tx = 2;
  spec.base.n_taps = 2;
  spec.base.n_pilot_blocks = 2;
  spec.base.n_data_symbols = 4;
  spec.base.tap_var = 1.0;
  spec.waveforms = {Waveform::kOfdm, Waveform::kSc};
  spec.est_methods = {"em", "bussgang"};
  spec.eq_method = "em";
  spec.snr_db = {-3.0};
  spec.trials = 3;
  spec.batch = 2;
  spec.with_ber = true;
  spec.with_crlb = true;
  spec.seed = 777;
  spec.workers = 1;
  return spec;
}

}  // namespace

TEST_CASE("compute_nmse basics") {
  const RngStream rng(1, 0, 0);
  CMat h(4, 6);
  for (int c = 0; c < 6; ++c)
    for (int r = 0; r < 4; ++r) h(r, c) = rng.cgauss(std::uint64_t(c) * 4 + std::uint64_t(r));
  CHECK(compute_nmse(h, h, 1.0) == 0.0);
  // h_hat = 2h doubles the error energy relative to h_hat = 0.
  CHECK(compute_nmse(2.0 * h, h, 1.0) ==
        doctest::Approx(compute_nmse(CMat::Zero(4, 6), h, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS((void)compute_nmse(h, CMat::Zero(4, 5), 1.0), std::invalid_argument);
}

TEST_CASE("zero estimate has unit mean NMSE under the generation prior") {
  SystemConfig cfg;
  cfg.n_rx = 2;
  cfg.n_tx = 2;
  cfg.n_taps = 4;
  cfg.tap_var = 0.7;
  ChannelModel model;
  double acc = 0.0;
  const int n = 4000;
  for (int t = 0; t < n; ++t) {
    const ChannelRealization ch = gen_channel(model, cfg, RngStream(9, 1, std::uint32_t(t)));
    acc += compute_nmse(CMat::Zero(4, 4), ch.taps, cfg.tap_variance());
  }
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("config parsing") {
  const std::string text =
      "# comment\n"
      "n = 32\n"
      "n_rx = 10\n"
      "n_tx = 2\n"
      "taps = 4\n"
      "pilot_blocks = 4\n"
      "tap_var = 1.0\n"
      "waveform = both\n"
      "est_methods = em,gamp\n"
      "eq_method = em\n"
      "snr_db = -9:2:-5\n"
      "trials = 8\n"
      "ber = off\n"
      "crlb = on\n"
      "seed = 99\n";
  const ExperimentSpec spec = parse_config(text);
  CHECK(spec.base.n_rx == 10);
  CHECK(spec.snr_db.size() == 3);
  CHECK(spec.snr_db[1] == doctest::Approx(-7.0));
  CHECK(spec.waveforms.size() == 2);
  CHECK(spec.est_methods.size() == 2);
  CHECK(!spec.with_ber);
  CHECK(spec.with_crlb);
  CHECK(spec.seed == 99);

  CHECK_THROWS_AS((void)parse_config("bogus_key = 3\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("est_methods = em,magic\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("n\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("est_methods = perfect\neq_method = same\n"), ConfigError);
}

TEST_CASE("experiments are deterministic and worker-count independent") {
  const ExperimentSpec spec = tiny_spec();
  const ExperimentResult r1 = run_experiment(spec);
  ExperimentSpec spec3 = spec;
  spec3.workers = 3;
  const ExperimentResult r3 = run_experiment(spec3);
  const ExperimentResult r1b = run_experiment(spec);
  CHECK(format_csv(r1) == format_csv(r1b));
  CHECK(format_csv(r1) == format_csv(r3));
  CHECK(r1.points.size() == 4);  // 2 waveforms x 2 methods x 1 snr
  for (const auto& p : r1.points) {
    CHECK(p.trials == 3);
    CHECK(std::isfinite(p.nmse));
    CHECK(p.bits_simulated > 0);
    CHECK(std::isfinite(p.crlb));
  }
}

TEST_CASE("perfect CSI rows have zero NMSE") {
  ExperimentSpec spec = tiny_spec();
  spec.est_methods = {"perfect"};
  spec.eq_method = "bussgang";
  spec.with_crlb = false;
  const ExperimentResult r = run_experiment(spec);
  for (const auto& p : r.points) {
    CHECK(p.nmse == 0.0);
    CHECK(p.method == "perfect+bussgang");
  }
}

TEST_CASE("operation counts follow the complexity model") {
  ExperimentSpec spec = tiny_spec();
  spec.waveforms = {Waveform::kSc};
  spec.trials = 2;
  spec.est_methods = {"em", "gamp", "bussgang", "ignoring"};
  const ExperimentResult r = run_experiment(spec);
  const double k = 16.0 * 2, p = 2.0 * 2, n_rx = 2, trials = 2;
  const auto& em = r.at(Waveform::kSc, "em", -3.0);
  CHECK(em.flops_est ==
        doctest::Approx(2.0 * k * p * em.est_iterations_mean * n_rx * trials).epsilon(1e-9));
  const auto& gamp = r.at(Waveform::kSc, "gamp", -3.0);
  CHECK(gamp.flops_est ==
        doctest::Approx(4.0 * k * p * gamp.est_iterations_mean * n_rx * trials).epsilon(1e-9));
  const auto& buss = r.at(Waveform::kSc, "bussgang", -3.0);
  CHECK(buss.flops_est == doctest::Approx(k * p * n_rx * trials).epsilon(1e-12));
  const auto& ign = r.at(Waveform::kSc, "ignoring", -3.0);
  CHECK(ign.flops_est == doctest::Approx(k * p * n_rx * trials).epsilon(1e-12));

  // OFDM Bussgang estimation uses the subcarrier path: N_r N_t N T per trial.
  ExperimentSpec mc = tiny_spec();
  mc.waveforms = {Waveform::kOfdm};
  mc.trials = 2;
  mc.est_methods = {"bussgang"};
  mc.with_ber = false;
  const ExperimentResult rm = run_experiment(mc);
  CHECK(rm.points[0].flops_est == doctest::Approx(2.0 * 2 * 16 * 2 * trials).epsilon(1e-12));
}

TEST_CASE("empty method list fails before any output") {
  ExperimentSpec spec = tiny_spec();
  spec.est_methods.clear();
  spec.out_csv = "/tmp/qmimo_should_not_exist.csv";
  std::remove(spec.out_csv.c_str());
  CHECK_THROWS_AS((void)sweep_and_emit(spec), ConfigError);
  std::ifstream probe(spec.out_csv);
  CHECK(!probe.good());
}

TEST_CASE("noiseless flat channel: every equalizer recovers the symbols") {
  SystemConfig cfg;
  cfg.n_sub = 8;
  cfg.n_rx = 1;
  cfg.n_tx = 1;
  cfg.n_taps = 2;
  cfg.n_data_symbols = 3;
  cfg.snr_db = 0.0;
  ChannelRealization ch;
  ch.n_rx = ch.n_tx = 1;
  ch.n_taps = 2;
  ch.tap_profile = RVec::Constant(2, 0.5);
  ch.taps = CMat::Zero(2, 1);
  ch.taps(0, 0) = 1.0;
  const Prior qpsk = Prior::discrete_uniform(Constellation::get(ConstellationId::kQpsk).points);
  const RngStream rng(42, 0, 0);
  // SC with a single tap is the sign-preserving case: A is (a scaled)
  // identity, so hard decisions on any equalizer output match the symbols.
  cfg.waveform = Waveform::kSc;
  QuantizedLinearModel eq = build_equalization_model(cfg, ch);
  eq.noise_var.setConstant(1e-9);  // effectively noiseless
  CMat x(8, 3);
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 8; ++i)
      x(i, m) = qpsk.points[rng.raw(std::uint64_t(m) * 8 + std::uint64_t(i))[0] % 4];
  const CMat y = quantize(CMat(eq.A * x));
  for (const Method method :
       {Method::kEm, Method::kGamp, Method::kBussgang, Method::kIgnoring}) {
    const SolverOptions opts = method == Method::kGamp ? SolverOptions::gamp_defaults()
                                                       : SolverOptions::em_defaults();
    const EqualizeResult res = equalize(eq, y, method, qpsk, opts);
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 8; ++i) {
        CHECK((res.x_hat(i, m).real() > 0) == (x(i, m).real() > 0));
        CHECK((res.x_hat(i, m).imag() > 0) == (x(i, m).imag() > 0));
      }
  }
}

TEST_CASE("csv format is stable") {
  ExperimentSpec spec = tiny_spec();
  spec.waveforms = {Waveform::kSc};
  spec.est_methods = {"ignoring"};
  spec.trials = 2;
  const ExperimentResult r = run_experiment(spec);
  const std::string csv = format_csv(r);
  CHECK(csv.rfind("snr_db,waveform,method,nmse,nmse_stderr,coded_ber,ber_stderr,crlb,trials,seed\n",
                  0) == 0);
  CHECK(csv.find("sc,ignoring+em,") != std::string::npos);
  CHECK(csv.find(",2,777\n") != std::string::npos);
}

TEST_SUITE_END();
