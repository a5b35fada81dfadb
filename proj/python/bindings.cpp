#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "supobs/certificate_io.hpp"
#include "supobs/errors.hpp"
#include "supobs/experiment.hpp"
#include "supobs/gain_design.hpp"
#include "supobs/models.hpp"
#include "supobs/pe_analysis.hpp"
#include "supobs/sampling.hpp"

namespace py = pybind11;
using namespace supobs;

namespace {

SamplingMode parse_mode(const std::string& s) {
  if (s == "static") return SamplingMode::Static;
  if (s == "dynamic") return SamplingMode::Dynamic;
  throw Error(Errc::ConfigError, "mode must be 'static' or 'dynamic', got '" + s + "'");
}

ParamBox box_of(const Vec& lower, const Vec& upper) { return ParamBox::from_bounds(lower, upper); }

// One row per recorded sample, columns as in trace_columns().
py::array_t<double> trace_matrix(const SupervisorTrace& tr) {
  const std::size_t cols = 2 + tr.np + 2 * tr.nx + 4;
  py::array_t<double> out({tr.rows.size(), cols});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    const TraceRow& r = tr.rows[i];
    std::size_t j = 0;
    a(i, j++) = r.t;
    a(i, j++) = static_cast<double>(r.sigma);
    for (Eigen::Index k = 0; k < r.p_hat.size(); ++k) a(i, j++) = r.p_hat(k);
    for (Eigen::Index k = 0; k < r.x_hat.size(); ++k) a(i, j++) = r.x_hat(k);
    for (Eigen::Index k = 0; k < r.x.size(); ++k) a(i, j++) = r.x(k);
    a(i, j++) = r.mu_min;
    a(i, j++) = r.err_p_inf;
    a(i, j++) = r.err_x_inf;
    a(i, j++) = static_cast<double>(r.zoom_k);
  }
  return out;
}

py::dict run_py(const ExperimentConfig& cfg, std::optional<std::string> mode, std::optional<std::size_t> m,
                std::optional<std::uint64_t> seed) {
  ExperimentConfig c = cfg;
  if (seed) c.input.seed = *seed;
  std::optional<SamplingMode> md;
  if (mode) md = parse_mode(*mode);
  ExperimentRun run;
  {
    const Experiment exp = Experiment::from_config(c);
    py::gil_scoped_release release;
    run = run_experiment(exp, md, m);
  }
  py::list zooms;
  for (const ZoomEvent& z : run.trace.zooms) {
    py::dict d;
    d["k"] = z.k;
    d["t"] = z.t;
    d["sigma_left"] = z.sigma_left;
    d["p_hat_left"] = z.p_hat_left;
    d["err_p_left_inf"] = z.err_p_left_inf;
    d["nested"] = z.nested;
    d["volume_before"] = z.volume_before;
    d["volume_after"] = z.volume_after;
    zooms.append(d);
  }
  py::dict out;
  out["mode"] = mode_name(run.mode);
  out["m"] = run.m;
  out["columns"] = trace_columns(run.trace.np, run.trace.nx);
  out["trace"] = trace_matrix(run.trace);
  out["summary"] = run.trace.summary;
  out["zooms"] = zooms;
  return out;
}

py::list verify_certificates_py(const std::string& path) {
  py::list out;
  const auto certs = read_certificates(path);
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const GainCertificateFile& f = certs[i];
    py::dict d;
    d["index"] = i;
    d["class"] = f.class_tag;
    if (f.class_tag != "circle_criterion" || !f.plant) {
      d["certified"] = py::none();
      d["reason"] = f.plant ? "not a circle-criterion entry" : "no plant matrices in the entry";
    } else {
      try {
        const CCCertificate cert = verify_cc_gains(f.lmi, *f.plant);
        d["certified"] = true;
        d["max_eig"] = cert.max_eig;
        d["reason"] = "";
      } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) throw;
        d["certified"] = false;
        d["reason"] = std::string(e.what());
      }
    }
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "supobs estimator core";

  py::exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("supobs._core").attr("Error");
      py::object exc = type(e.what());
      exc.attr("code") = std::string(errc_name(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  py::class_<ExperimentConfig>(mod, "ExperimentConfig")
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("theta_lower", &ExperimentConfig::theta_lower)
      .def_readwrite("theta_upper", &ExperimentConfig::theta_upper)
      .def_readwrite("m", &ExperimentConfig::m)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("Td", &ExperimentConfig::Td)
      .def_readwrite("lam", &ExperimentConfig::lambda)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("t_final", &ExperimentConfig::t_final)
      .def_readwrite("record_stride", &ExperimentConfig::record_stride)
      .def_readwrite("p_star", &ExperimentConfig::p_star)
      .def_property(
          "mode", [](const ExperimentConfig& c) { return mode_name(c.mode); },
          [](ExperimentConfig& c, const std::string& s) { c.mode = parse_mode(s); })
      .def("validate", &ExperimentConfig::validate)
      .def("serialize", &serialize_config);

  py::class_<RunSummary>(mod, "RunSummary")
      .def_readonly("sigma", &RunSummary::sigma)
      .def_readonly("p_hat", &RunSummary::p_hat)
      .def_readonly("err_p_inf", &RunSummary::err_p_inf)
      .def_readonly("err_p_2", &RunSummary::err_p_2)
      .def_readonly("err_x_inf", &RunSummary::err_x_inf)
      .def_readonly("err_x_2", &RunSummary::err_x_2)
      .def_readonly("normalized_state_error", &RunSummary::normalized_state_error)
      .def_readonly("zoom_count", &RunSummary::zoom_count)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds);

  py::class_<Nearest>(mod, "Nearest")
      .def_readonly("distance", &Nearest::distance)
      .def_readonly("index", &Nearest::index);

  mod.def("load_config", &load_config, py::arg("path"));
  mod.def(
      "parse_config",
      [](const std::string& text) {
        std::istringstream is(text);
        return parse_config(is);
      },
      py::arg("text"));
  mod.def("run", &run_py, py::arg("config"), py::arg("mode") = py::none(), py::arg("m") = py::none(),
          py::arg("seed") = py::none(), "Run one experiment; returns columns, trace matrix, summary and zooms.");
  mod.def("trace_columns", &trace_columns, py::arg("np"), py::arg("nx"));

  mod.def(
      "grid_sample", [](const Vec& lower, const Vec& upper, std::size_t m) { return grid_sample(box_of(lower, upper), m).points; },
      py::arg("lower"), py::arg("upper"), py::arg("m"));
  mod.def(
      "distance_to_set", [](const Vec& p, const std::vector<Vec>& pts) { return distance_to_set(p, pts); },
      py::arg("p"), py::arg("points"));

  mod.def(
      "sigmoid", [](double v) { return sigmoid(v, JansenRitParams{}); }, py::arg("v"),
      "Jansen-Rit firing-rate sigmoid with the default constants.");
  mod.def(
      "solve_lyapunov", [](const Mat& a, double nu) { return solve_lyapunov(a, nu); }, py::arg("a"),
      py::arg("nu") = 2.0);
  mod.def(
      "windowed_energy",
      [](const std::vector<double>& t, const Mat& y, double window) {
        std::vector<Vec> rows;
        rows.reserve(static_cast<std::size_t>(y.rows()));
        for (Eigen::Index i = 0; i < y.rows(); ++i) rows.emplace_back(y.row(i).transpose());
        const WindowedSeries s = windowed_energy(t, rows, window);
        return py::make_tuple(s.t, s.value);
      },
      py::arg("t"), py::arg("y_err"), py::arg("window"));
  mod.def("verify_certificates", &verify_certificates_py, py::arg("path"));
}
