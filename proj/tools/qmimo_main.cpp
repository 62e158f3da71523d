#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "qmimo/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out, int workers, long seed,
            bool have_seed) {
  qmimo::ExperimentSpec spec = qmimo::parse_config_file(config_path);
  if (!out.empty()) spec.out_csv = out;
  if (workers >= 0) spec.workers = workers;
  if (have_seed) spec.seed = std::uint64_t(seed);
  const auto result = qmimo::sweep_and_emit(spec);
  std::cout << qmimo::format_csv(result);
  return 0;
}

int cmd_crlb(const std::string& config_path, int workers, long seed, bool have_seed) {
  qmimo::ExperimentSpec spec = qmimo::parse_config_file(config_path);
  if (workers >= 0) spec.workers = workers;
  if (have_seed) spec.seed = std::uint64_t(seed);
  spec.with_crlb = true;
  spec.with_ber = false;
  spec.est_methods = {"perfect"};
  spec.eq_method = "em";
  const auto result = qmimo::run_experiment(spec);
  std::printf("snr_db,waveform,crlb,trials,seed\n");
  for (const auto& p : result.points)
    std::printf("%.17g,%s,%.17g,%ld,%llu\n", p.snr_db, qmimo::to_string(p.waveform).c_str(),
                p.crlb, p.trials, static_cast<unsigned long long>(spec.seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-bit quantized MIMO link simulator"};
  app.require_subcommand(1);

  std::string config_path, out_csv;
  int workers = -1;
  long seed = 0;

  auto* run = app.add_subcommand("run", "run an experiment sweep and write CSV/JSON results");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_csv, "output CSV path (overrides config)");
  auto* run_workers = run->add_option("--workers", workers, "worker thread count");
  auto* run_seed = run->add_option("--seed", seed, "master seed (overrides config)");

  auto* crlb = app.add_subcommand("crlb", "evaluate the averaged normalized CRLB for a config");
  crlb->add_option("--config", config_path, "experiment config file")->required();
  auto* crlb_workers = crlb->add_option("--workers", workers, "worker thread count");
  auto* crlb_seed = crlb->add_option("--seed", seed, "master seed (overrides config)");

  auto* dump = app.add_subcommand("dump-tables", "print constellation and code tables");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(run))
      return cmd_run(config_path, out_csv, run_workers->count() ? workers : -1, seed,
                     run_seed->count() > 0);
    if (app.got_subcommand(crlb))
      return cmd_crlb(config_path, crlb_workers->count() ? workers : -1, seed,
                      crlb_seed->count() > 0);
    if (app.got_subcommand(dump)) {
      std::cout << qmimo::dump_tables();
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const qmimo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
