#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <vector>

#include "ricci/cli.hpp"
#include "ricci/diagnostics.hpp"
#include "ricci/estimates.hpp"
#include "ricci/experiments.hpp"
#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"

namespace py = pybind11;
using namespace ricci;

namespace {

// pybind11 cannot hold shared_ptr<const T>, so surfaces travel in a handle.
struct SurfaceHandle {
  SurfacePtr ptr;
  const BackgroundSurface* operator->() const { return ptr.get(); }
};

py::array_t<double> to_array(std::span<const double> v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

ScalarField field_from(const SurfaceHandle& h, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1 || static_cast<std::size_t>(a.size()) != h->num_nodes()) {
    throw py::value_error("expected a flat array of " + std::to_string(h->num_nodes()) + " nodal values");
  }
  return ScalarField(h.ptr, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict record_dict(const DiagnosticsRecord& r) {
  py::dict d;
  d["t"] = r.t;
  d["volume"] = r.volume;
  d["energy"] = r.energy;
  d["dissipation_cum"] = r.dissipation_cum;
  d["energy_residual"] = r.energy_residual;
  d["curv_dev_linf"] = r.curv_dev_linf;
  d["curv_dev_l2"] = r.curv_dev_l2;
  d["rg"] = r.rg;
  return d;
}

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["correlation"] = f.correlation;
  d["points"] = f.points;
  d["status"] = f.status;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Normalized Ricci flow of conformal metrics on flat tori and round spheres";

  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<SurfaceKind>(m, "SurfaceKind")
      .value("FlatTorus", SurfaceKind::FlatTorus)
      .value("RoundSphere", SurfaceKind::RoundSphere);
  py::enum_<Integrator>(m, "Integrator").value("RK4", Integrator::RK4).value("IMEX1", Integrator::IMEX1);
  py::enum_<VolumeControl>(m, "VolumeControl")
      .value("Auto", VolumeControl::Auto)
      .value("Off", VolumeControl::Off)
      .value("Renormalize", VolumeControl::Renormalize);

  py::class_<SurfaceHandle>(m, "Surface")
      .def(py::init([](const std::string& kind, int resolution) {
             return SurfaceHandle{build_surface(surface_kind_from_string(kind), resolution)};
           }),
           py::arg("kind"), py::arg("resolution"))
      .def_property_readonly("kind", [](const SurfaceHandle& h) { return h->kind(); })
      .def_property_readonly("resolution", [](const SurfaceHandle& h) { return h->resolution(); })
      .def_property_readonly("kbar", [](const SurfaceHandle& h) { return h->kbar(); })
      .def_property_readonly("num_nodes", [](const SurfaceHandle& h) { return h->num_nodes(); })
      .def_property_readonly("weights", [](const SurfaceHandle& h) { return to_array(h->weights()); })
      .def_property_readonly("coord1", [](const SurfaceHandle& h) { return to_array(h->coord1()); })
      .def_property_readonly("coord2", [](const SurfaceHandle& h) { return to_array(h->coord2()); })
      .def("__repr__", [](const SurfaceHandle& h) { return h->describe(); });

  py::class_<FlowConfig>(m, "FlowConfig")
      .def(py::init<>())
      .def_readwrite("integrator", &FlowConfig::integrator)
      .def_readwrite("dt", &FlowConfig::dt)
      .def_readwrite("t_end", &FlowConfig::t_end)
      .def_readwrite("cfl_safety", &FlowConfig::cfl_safety)
      .def_readwrite("store_every", &FlowConfig::store_every)
      .def_readwrite("volume", &FlowConfig::volume)
      .def("validate", &FlowConfig::validate);

  // Fields cross the boundary as flat numpy arrays in node order.
  m.def("random_initial_data",
        [](const SurfaceHandle& s, std::uint64_t seed, int band_limit, double amplitude) {
          return to_array(random_initial_data(s.ptr, seed, band_limit, amplitude).values());
        },
        py::arg("surface"), py::arg("seed"), py::arg("band_limit") = 0, py::arg("amplitude") = 0.3);

  m.def("eval_rhs", [](const SurfaceHandle& s, py::array_t<double> u) {
    return to_array(eval_rhs(field_from(s, u)).values());
  });
  m.def("laplacian", [](const SurfaceHandle& s, py::array_t<double> u) {
    return to_array(laplacian(field_from(s, u)).values());
  });
  m.def("normalize_volume", [](const SurfaceHandle& s, py::array_t<double> u) {
    return to_array(normalize_volume(field_from(s, u)).values());
  });
  m.def("volume", [](const SurfaceHandle& s, py::array_t<double> u) { return volume(field_from(s, u)); });
  m.def("liouville_energy",
        [](const SurfaceHandle& s, py::array_t<double> u) { return liouville_energy(field_from(s, u)); });
  m.def("gauss_curvature", [](const SurfaceHandle& s, py::array_t<double> u) {
    return to_array(gauss_curvature(field_from(s, u)).values());
  });
  m.def("gauss_bonnet_check",
        [](const SurfaceHandle& s, py::array_t<double> u) { return gauss_bonnet_check(field_from(s, u)); });
  m.def("gn_ratio", [](const SurfaceHandle& s, py::array_t<double> f) { return gn_ratio(field_from(s, f)); });
  m.def("tm_ratio", [](const SurfaceHandle& s, py::array_t<double> f) { return tm_ratio(field_from(s, f)); });

  m.def(
      "evolve",
      [](const SurfaceHandle& s, py::array_t<double> u0, const FlowConfig& cfg) {
        Trajectory traj;
        {
          auto u = field_from(s, u0);
          py::gil_scoped_release release;
          traj = evolve(u, cfg);
        }
        py::array_t<double> states({static_cast<py::ssize_t>(traj.size()),
                                    static_cast<py::ssize_t>(s->num_nodes())});
        auto* out = states.mutable_data();
        for (const auto& st : traj.states) out = std::copy(st.values().begin(), st.values().end(), out);
        py::list diag;
        for (const auto& r : diagnose(traj)) diag.append(record_dict(r));
        py::dict d;
        d["times"] = traj.times;
        d["states"] = states;
        d["completed"] = traj.completed();
        d["message"] = traj.message;
        d["substeps"] = traj.substeps;
        d["diagnostics"] = diag;
        return d;
      },
      py::arg("surface"), py::arg("u0"), py::arg("config"));

  m.def("manufactured_convergence", [](const std::string& surface, int resolution,
                                       std::vector<double> dt_levels, double t_end) {
    auto spec = default_spec("manufactured");
    spec.surface = surface_kind_from_string(surface);
    spec.resolution = resolution;
    spec.dt_levels = std::move(dt_levels);
    spec.t_end = t_end;
    ManufacturedResult r;
    {
      py::gil_scoped_release release;
      r = manufactured_convergence(spec);
    }
    py::dict d;
    d["rk4"] = fit_dict(r.rk4_fit);
    d["imex1"] = fit_dict(r.imex1_fit);
    return d;
  });

  m.def(
      "run",
      [](const std::string& config_text, const std::vector<std::string>& overrides) {
        auto cfg = parse_config(config_text, overrides);
        std::ostringstream log, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run(cfg, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{});
}
