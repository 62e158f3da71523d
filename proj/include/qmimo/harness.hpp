#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmimo/channel.hpp"
#include "qmimo/estimators.hpp"
#include "qmimo/system_models.hpp"

namespace qmimo {

// Stream roles for the per-(seed, role, trial) counter RNG. Per-antenna
// streams are offset from the base role so pilot blocks extend prefixes:
// rerunning with more pilot blocks or symbols reuses the shared draws.
enum RngRole : std::uint32_t {
  kRoleChannel = 0x10000u,
  kRolePilotNoise = 0x20000u,  // + receive antenna
  kRoleDataNoise = 0x30000u,   // + receive antenna
  kRoleDataBits = 0x40000u,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  SystemConfig base;
  std::vector<Waveform> waveforms{Waveform::kOfdm, Waveform::kSc};
  std::vector<std::string> est_methods{"em"};  // em|gamp|bussgang|ignoring|perfect
  std::string eq_method = "em";                // em|gamp|bussgang|ignoring|same
  std::vector<double> snr_db{0.0};
  ChannelModel channel;
  int trials = 1024;
  int batch = 64;              // deterministic adaptive-stop granularity
  int ber_target_errors = 0;   // 0 = always run `trials`
  bool with_ber = true;
  bool with_crlb = false;
  bool strict = false;         // escalate estimability warning to an error
  std::uint64_t seed = 1;
  int workers = 0;             // 0 = hardware concurrency
  SolverOptions em_opts = SolverOptions::em_defaults();
  SolverOptions gamp_opts = SolverOptions::gamp_defaults();
  std::string out_csv;
  std::string out_json;

  void validate() const;
};

struct PointResult {
  double snr_db = 0.0;
  Waveform waveform = Waveform::kOfdm;
  std::string method;  // "<est>" or "<est>+<eq>"
  double nmse = 0.0, nmse_stderr = 0.0;
  double coded_ber = 0.0, ber_stderr = 0.0;
  double crlb = 0.0;
  long trials = 0;
  long bits_simulated = 0;
  long bit_errors = 0;
  double est_iterations_mean = 0.0;
  double eq_iterations_mean = 0.0;
  double flops_est = 0.0, flops_eq = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<PointResult> points;

  const PointResult& at(Waveform wf, const std::string& est, double snr) const;
};

// NMSE of a channel estimate: ||H_hat - H||_F^2 / (N_r N_t L sigma_h^2),
// with taps stored L x (N_r * N_t).
double compute_nmse(const CMat& taps_hat, const CMat& taps_true, double sigma_h_sq);

ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string format_csv(const ExperimentResult& result);
std::string format_json(const ExperimentResult& result);
// Runs the experiment and writes the CSV and companion JSON files.
ExperimentResult sweep_and_emit(const ExperimentSpec& spec);

// Flat key = value config text (# comments). Lists are comma separated;
// SNR grids also accept start:step:stop.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

// Constellation, code and interleaver tables in a fixed text format for
// bit-exact cross-implementation comparison.
std::string dump_tables();

}  // namespace qmimo
