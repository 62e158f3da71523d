#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qmimo/constellation.hpp"
#include "qmimo/convcode.hpp"
#include "qmimo/harness.hpp"

namespace qmimo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config: bad flag for " + key + ": '" + v + "'");
}

// Comma list of values, or start:step:stop.
std::vector<double> parse_grid(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError("config: bad range for " + key + ": '" + v + "'");
    const double start = parse_double(key, parts[0]);
    const double step = parse_double(key, parts[1]);
    const double stop = parse_double(key, parts[2]);
    if (step <= 0.0) throw ConfigError("config: range step must be positive for " + key);
    for (double x = start; x <= stop + 1e-9; x += step) out.push_back(x);
    return out;
  }
  for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  ExperimentSpec spec;
  spec.base.tap_var = 0.0;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config: empty value for " + key);

    if (key == "n") spec.base.n_sub = int(parse_int(key, val));
    else if (key == "n_tx") spec.base.n_tx = int(parse_int(key, val));
    else if (key == "n_rx") spec.base.n_rx = int(parse_int(key, val));
    else if (key == "taps") spec.base.n_taps = int(parse_int(key, val));
    else if (key == "pilot_blocks") spec.base.n_pilot_blocks = int(parse_int(key, val));
    else if (key == "data_symbols") spec.base.n_data_symbols = int(parse_int(key, val));
    else if (key == "noise_var") spec.base.noise_var = parse_double(key, val);
    else if (key == "tap_var") spec.base.tap_var = val == "auto" ? 0.0 : parse_double(key, val);
    else if (key == "constellation") spec.base.constellation = constellation_from_string(val);
    else if (key == "waveform") {
      spec.waveforms.clear();
      if (val == "both") {
        spec.waveforms = {Waveform::kOfdm, Waveform::kSc};
      } else {
        for (const auto& w : split(val, ',')) spec.waveforms.push_back(waveform_from_string(w));
      }
    } else if (key == "est_methods") spec.est_methods = split(val, ',');
    else if (key == "eq_method") spec.eq_method = val;
    else if (key == "snr_db") spec.snr_db = parse_grid(key, val);
    else if (key == "channel") spec.channel.kind = channel_model_from_string(val);
    else if (key == "epa_rate_hz") spec.channel.epa_rate_hz = parse_double(key, val);
    else if (key == "trials") spec.trials = int(parse_int(key, val));
    else if (key == "batch") spec.batch = int(parse_int(key, val));
    else if (key == "ber_target_errors") spec.ber_target_errors = int(parse_int(key, val));
    else if (key == "ber") spec.with_ber = parse_bool(key, val);
    else if (key == "crlb") spec.with_crlb = parse_bool(key, val);
    else if (key == "strict") spec.strict = parse_bool(key, val);
    else if (key == "seed") spec.seed = std::uint64_t(parse_int(key, val));
    else if (key == "workers") spec.workers = int(parse_int(key, val));
    else if (key == "em_max_iters") spec.em_opts.max_iters = int(parse_int(key, val));
    else if (key == "em_eps") spec.em_opts.eps = parse_double(key, val);
    else if (key == "gamp_max_iters") spec.gamp_opts.max_iters = int(parse_int(key, val));
    else if (key == "gamp_eps") spec.gamp_opts.eps = parse_double(key, val);
    else if (key == "gamp_damping") spec.gamp_opts.damping = parse_double(key, val);
    else if (key == "out") spec.out_csv = val;
    else if (key == "json") spec.out_json = val;
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string format_json(const ExperimentResult& result) {
  using nlohmann::json;
  const ExperimentSpec& spec = result.spec;
  json j;
  j["spec"] = {
      {"n", spec.base.n_sub},
      {"n_tx", spec.base.n_tx},
      {"n_rx", spec.base.n_rx},
      {"taps", spec.base.n_taps},
      {"pilot_blocks", spec.base.n_pilot_blocks},
      {"data_symbols", spec.base.n_data_symbols},
      {"noise_var", spec.base.noise_var},
      {"tap_var", spec.base.tap_variance()},
      {"constellation", to_string(spec.base.constellation)},
      {"channel", to_string(spec.channel.kind)},
      {"epa_rate_hz", spec.channel.epa_rate_hz},
      {"est_methods", spec.est_methods},
      {"eq_method", spec.eq_method},
      {"snr_db", spec.snr_db},
      {"trials", spec.trials},
      {"batch", spec.batch},
      {"ber_target_errors", spec.ber_target_errors},
      {"ber", spec.with_ber},
      {"crlb", spec.with_crlb},
      {"seed", spec.seed},
      {"em_max_iters", spec.em_opts.max_iters},
      {"em_eps", spec.em_opts.eps},
      {"gamp_max_iters", spec.gamp_opts.max_iters},
      {"gamp_eps", spec.gamp_opts.eps},
      {"gamp_damping", spec.gamp_opts.damping},
  };
  json pts = json::array();
  for (const auto& p : result.points) {
    json e = {
        {"snr_db", p.snr_db},
        {"waveform", to_string(p.waveform)},
        {"method", p.method},
        {"nmse", p.nmse},
        {"nmse_stderr", p.nmse_stderr},
        {"trials", p.trials},
        {"est_iterations_mean", p.est_iterations_mean},
        {"flops_est", p.flops_est},
    };
    if (spec.with_ber) {
      e["coded_ber"] = p.coded_ber;
      e["ber_stderr"] = p.ber_stderr;
      e["bits_simulated"] = p.bits_simulated;
      e["bit_errors"] = p.bit_errors;
      e["eq_iterations_mean"] = p.eq_iterations_mean;
      e["flops_eq"] = p.flops_eq;
    }
    if (spec.with_crlb) e["crlb"] = p.crlb;
    pts.push_back(e);
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

std::string dump_tables() {
  std::string out;
  for (const ConstellationId id :
       {ConstellationId::kQpsk, ConstellationId::kPsk8, ConstellationId::kQam8}) {
    const Constellation& c = Constellation::get(id);
    out += "constellation " + to_string(id) +
           " bits_per_symbol=" + std::to_string(c.bits_per_symbol) + "\n";
    out += "label re im\n";
    for (Eigen::Index b = 0; b < c.points.size(); ++b) {
      std::string bits;
      for (int k = c.bits_per_symbol - 1; k >= 0; --k) bits += char('0' + ((b >> k) & 1));
      out += bits + " " + fmt17(c.points[b].real()) + " " + fmt17(c.points[b].imag()) + "\n";
    }
    out += "\n";
  }
  out += "convolutional_code constraint_length=7 generators_octal=133,171 termination=zero\n";
  out += "puncture rate=3/4 pattern_c1=110 pattern_c2=101\n";
  out += "interleaver row-column rows=data_symbols cols=coded_bits/data_symbols\n";
  return out;
}

}  // namespace qmimo
