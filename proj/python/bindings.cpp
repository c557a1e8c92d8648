#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qfluct/harness.hpp"
#include "qfluct/tilted.hpp"

namespace py = pybind11;
using namespace qfluct;

namespace {

TimeGrid grid_of(double t_f, double dt, std::size_t stride) { return TimeGrid::covering(t_f, dt, stride); }

py::array_t<Complex> stack(const std::vector<Operator>& ops) {
  const Index d = ops.empty() ? 0 : ops.front().rows();
  py::array_t<Complex> out({static_cast<py::ssize_t>(ops.size()), static_cast<py::ssize_t>(d),
                            static_cast<py::ssize_t>(d)});
  auto v = out.mutable_unchecked<3>();
  for (std::size_t k = 0; k < ops.size(); ++k)
    for (Index r = 0; r < d; ++r)
      for (Index c = 0; c < d; ++c) v(static_cast<py::ssize_t>(k), r, c) = ops[k](r, c);
  return out;
}

py::dict series_dict(const ResultSeries& s) {
  py::dict d;
  d["t"] = py::array(py::cast(s.times()));
  for (const auto& [name, values] : s.columns()) d[py::str(name)] = py::array(py::cast(values));
  return d;
}

DensityMatrix as_state(const Operator& rho) { return DensityMatrix::from_operator(rho); }

}  // namespace

PYBIND11_MODULE(_qfluct, m) {
  m.doc() = "Tilted generating-function operator and quantum-jump checks of the integral fluctuation theorem";

  // The module attributes keep both exception types alive.
  static PyObject* base_type = py::exception<Error>(m, "QfluctError", PyExc_RuntimeError).ptr();
  static PyObject* config_type = py::exception<ConfigError>(m, "ConfigError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetObject(config_type, py::make_tuple(e.what(), e.field()).ptr());
    } catch (const Error& e) {
      PyErr_SetString(base_type, e.what());
    }
  });

  py::class_<TwoSpinParams>(m, "TwoSpinParams")
      .def(py::init([](double J, double h0, double h1, double t_f, double T_a, double T_b, double g) {
             return TwoSpinParams{J, h0, h1, t_f, T_a, T_b, g};
           }),
           py::arg("J") = 0.0, py::arg("h0") = 0.2, py::arg("h1") = 0.2, py::arg("t_f") = 15.0,
           py::arg("T_a") = 1.0, py::arg("T_b") = 1.0, py::arg("g") = 0.1)
      .def_readwrite("J", &TwoSpinParams::J)
      .def_readwrite("h0", &TwoSpinParams::h0)
      .def_readwrite("h1", &TwoSpinParams::h1)
      .def_readwrite("t_f", &TwoSpinParams::t_f)
      .def_readwrite("T_a", &TwoSpinParams::T_a)
      .def_readwrite("T_b", &TwoSpinParams::T_b)
      .def_readwrite("g", &TwoSpinParams::g)
      .def("field", &TwoSpinParams::field);

  m.def("version", &version);
  m.def("bosonic_rate", &bosonic_rate, py::arg("omega"), py::arg("beta"), py::arg("g"));
  m.def("two_spin_hamiltonian", &two_spin_hamiltonian, py::arg("J"), py::arg("h"));
  m.def("coherent_thermal_state", [](double h) { return coherent_thermal_state(h).matrix(); }, py::arg("h") = 0.2);

  m.def(
      "evolve_density",
      [](const TwoSpinParams& p, const Operator& rho0, double dt, std::size_t stride) {
        const StateSeries s = evolve_density(build_two_spin_model(p), as_state(rho0), grid_of(p.t_f, dt, stride));
        py::dict d;
        d["t"] = py::array(py::cast(s.times));
        d["rho"] = stack(s.rho);
        d["Q_D_a"] = py::array(py::cast(s.heat.at(0)));
        d["Q_D_b"] = py::array(py::cast(s.heat.at(1)));
        d["second_law_gap"] = py::array(py::cast(second_law_gap(s)));
        return d;
      },
      py::arg("params"), py::arg("rho0"), py::arg("dt") = 1e-3, py::arg("stride") = 500);

  m.def(
      "tilted_generator",
      [](const TwoSpinParams& p, const Operator& x, double xi, double t) {
        return tilted_generator(build_two_spin_model(p), x, xi, t);
      },
      py::arg("params"), py::arg("x"), py::arg("xi"), py::arg("t") = 0.0);

  m.def(
      "evolve_tilted",
      [](const TwoSpinParams& p, const Operator& x0, double xi, double dt, std::size_t stride) {
        const TiltedSeries s = evolve_tilted(build_two_spin_model(p), x0, xi, grid_of(p.t_f, dt, stride));
        return py::make_tuple(py::array(py::cast(s.times)), stack(s.psi));
      },
      py::arg("params"), py::arg("x0"), py::arg("xi") = 1.0, py::arg("dt") = 1e-3, py::arg("stride") = 500);

  m.def(
      "psi_bar_deviation",
      [](const TwoSpinParams& p, std::optional<Operator> basis, double dt, std::size_t stride) {
        const LindbladModel model = build_two_spin_model(p);
        const TimeGrid grid = grid_of(p.t_f, dt, stride);
        const PsiBarReport r = basis ? psi_bar_one(model, *basis, grid) : psi_bar_one(model, grid);
        py::dict d;
        d["t"] = py::array(py::cast(r.times));
        d["deviation"] = py::array(py::cast(r.deviation));
        d["trace_sum"] = py::array(py::cast(r.trace_sum));
        d["max_deviation"] = r.max_deviation;
        return d;
      },
      py::arg("params"), py::arg("basis") = py::none(), py::arg("dt") = 1e-3, py::arg("stride") = 500);

  m.def(
      "ft_functional",
      [](const TwoSpinParams& p, const Operator& rho0, const Operator& rho_f, double dt) {
        return ft_functional(build_two_spin_model(p), as_state(rho0), as_state(rho_f), grid_of(p.t_f, dt, 1));
      },
      py::arg("params"), py::arg("rho0"), py::arg("rho_f"), py::arg("dt") = 1e-3);

  m.def(
      "jarzynski_lhs",
      [](const TwoSpinParams& p, double beta, double dt, std::size_t stride) {
        const JarzynskiExact j = jarzynski_lhs(build_two_spin_model(p), beta, grid_of(p.t_f, dt, stride));
        py::dict d;
        d["t"] = py::array(py::cast(j.times));
        d["lhs"] = py::array(py::cast(j.lhs));
        d["rhs"] = py::array(py::cast(j.rhs));
        return d;
      },
      py::arg("params"), py::arg("beta") = 1.0, py::arg("dt") = 1e-3, py::arg("stride") = 500);

  m.def(
      "generating_function",
      [](const TwoSpinParams& p, const Operator& rho0, double xi, double dt, std::size_t stride) {
        return generating_function(build_two_spin_model(p), as_state(rho0), xi, grid_of(p.t_f, dt, stride));
      },
      py::arg("params"), py::arg("rho0"), py::arg("xi"), py::arg("dt") = 1e-3, py::arg("stride") = 500);

  m.def("load_config", [](const std::string& text) { return to_json(load_config(text)); }, py::arg("text"),
        "Validates a JSON config and returns its canonical form.");
  m.def("config_hash", [](const std::string& text) { return config_hash(load_config(text)); }, py::arg("text"));
  m.def("panel_config", [](const std::string& name) { return to_json(panel_config(name)); }, py::arg("name"));

  m.def(
      "run_experiment",
      [](const std::string& text) {
        const ExperimentConfig cfg = load_config(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::dict d;
        d["config_hash"] = r.config_hash;
        if (cfg.runs_exact()) d["exact"] = series_dict(r.exact);
        if (r.summary) d["summary"] = series_dict(*r.summary);
        d["rho"] = stack(r.density.rho);
        d["n_events"] = r.events.size();
        d["files"] = r.files;
        d["meta"] = r.meta_json;
        return d;
      },
      py::arg("config_json"));
}
