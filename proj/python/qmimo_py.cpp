#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmimo/channel.hpp"
#include "qmimo/crlb.hpp"
#include "qmimo/estimators.hpp"
#include "qmimo/harness.hpp"

namespace py = pybind11;
using namespace qmimo;

namespace {

QuantizedLinearModel make_model(const CMat& a, const RVec& noise_var, const CVec& y) {
  QuantizedLinearModel m;
  m.A = a;
  m.noise_var = noise_var;
  m.y = y;
  m.validate();
  return m;
}

py::dict report_dict(const EstimateReport& rep) {
  py::dict d;
  d["estimate"] = rep.estimate;
  d["iterations"] = rep.iterations;
  d["converged"] = rep.converged;
  d["flops_estimate"] = rep.flops_estimate;
  d["regularized"] = rep.regularized;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qmimo, m) {
  m.doc() = "1-bit quantized MIMO estimation and equalization core";

  m.def("quantize", [](const CVec& z) { return quantize(z); },
        "Elementwise sign of real and imaginary parts (sign(0) = +1)");
  m.def("dft_matrix", &dft_matrix);
  m.def("dft_tall", &dft_tall);
  m.def("circulant_from_taps", &circulant_from_taps);

  m.def(
      "simulate_observation",
      [](const CMat& a, const CVec& h, const RVec& noise_var, std::uint64_t seed,
         std::uint32_t trial) {
        return simulate_observation(a, h, noise_var, RngStream(seed, 0xD0, trial));
      },
      py::arg("a"), py::arg("h"), py::arg("noise_var"), py::arg("seed"), py::arg("trial") = 0);

  m.def(
      "em_estimate",
      [](const CMat& a, const RVec& noise_var, const CVec& y, const RVec& rhh_diag,
         int max_iters, double eps) {
        SolverOptions opts = SolverOptions::em_defaults();
        opts.max_iters = max_iters;
        opts.eps = eps;
        return report_dict(em_estimate(make_model(a, noise_var, y), rhh_diag, opts));
      },
      py::arg("a"), py::arg("noise_var"), py::arg("y"), py::arg("rhh_diag"),
      py::arg("max_iters") = 50, py::arg("eps") = 1e-6);

  m.def(
      "gamp_estimate_gaussian",
      [](const CMat& a, const RVec& noise_var, const CVec& y, const RVec& prior_var,
         int max_iters, double eps, double damping) {
        SolverOptions opts = SolverOptions::gamp_defaults();
        opts.max_iters = max_iters;
        opts.eps = eps;
        opts.damping = damping;
        return report_dict(
            gamp_estimate(make_model(a, noise_var, y), Prior::gaussian(prior_var), opts));
      },
      py::arg("a"), py::arg("noise_var"), py::arg("y"), py::arg("prior_var"),
      py::arg("max_iters") = 30, py::arg("eps") = 1e-6, py::arg("damping") = 0.7);

  m.def(
      "bussgang_estimate",
      [](const CMat& a, const RVec& noise_var, const CVec& y, const RVec& rhh_diag) {
        const QuantizedLinearModel model = make_model(a, noise_var, y);
        return report_dict(bussgang_estimate(model, rhh_diag, bussgang_decompose(model, rhh_diag)));
      },
      py::arg("a"), py::arg("noise_var"), py::arg("y"), py::arg("rhh_diag"));

  m.def(
      "ignoring_estimate",
      [](const CMat& a, const RVec& noise_var, const CVec& y, const RVec& rhh_diag) {
        return report_dict(ignoring_estimate(make_model(a, noise_var, y), rhh_diag));
      },
      py::arg("a"), py::arg("noise_var"), py::arg("y"), py::arg("rhh_diag"));

  m.def(
      "crlb_trace",
      [](const CMat& a, const RVec& noise_var, const CVec& h_true) {
        QuantizedLinearModel model;
        model.A = a;
        model.noise_var = noise_var;
        return crlb_trace(model, h_true);
      },
      py::arg("a"), py::arg("noise_var"), py::arg("h_true"));

  m.def("run_experiment_config", [](const std::string& config_text) {
    const ExperimentSpec spec = parse_config(config_text);
    return format_csv(run_experiment(spec));
  });

  m.def("dump_tables", &dump_tables);
}
