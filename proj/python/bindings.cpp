#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hystermag/config.hpp"
#include "hystermag/dynamic_sheet.hpp"
#include "hystermag/errors.hpp"
#include "hystermag/inversion.hpp"
#include "hystermag/postproc.hpp"
#include "hystermag/simulate.hpp"

namespace py = pybind11;
using namespace hystermag;

namespace {

InversionScheme scheme_from(const std::string& name) {
  const auto s = parse_scheme(name);
  if (!s) throw InvalidInput("unknown inversion scheme '" + name + "'");
  return *s;
}

py::dict simulate(const std::string& config_json, int threads) {
  const RunConfig cfg = parse_run_config(config_json);
  SimulationOutput out;
  {
    py::gil_scoped_release release;
    out = run_simulation(cfg, threads);
  }
  py::list balance;
  for (const auto& row : out.balance) {
    py::dict d;
    d["cycle"] = row.cycle;
    d["input"] = row.energy.input;
    d["dw_mag"] = row.energy.storage;
    d["dw_mag_state"] = row.energy.storage_state;
    d["resistive"] = row.energy.resistive;
    d["eddy"] = row.energy.eddy;
    d["hyst"] = row.energy.hyst;
    d["relative_defect"] = row.relative_defect;
    balance.append(d);
  }
  py::dict result;
  result["steps"] = out.archive.steps.size();
  result["newton_iterations"] = out.archive.newton_total;
  result["t"] = out.losses.t;
  result["p_res"] = out.losses.p_res;
  result["p_eddy"] = out.losses.p_eddy;
  result["p_hyst"] = out.losses.p_hyst;
  result["dipole_t"] = out.dipole.t;
  result["dipole_By"] = out.dipole.By;
  result["balance"] = balance;
  return result;
}

}  // namespace

PYBIND11_MODULE(_hystermag, m) {
  m.doc() = "Vector hysteresis material model and 2-D transient magnet solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRange", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.attr("MU0") = kMu0;

  m.def("langevin", &langevin, py::arg("x"));

  py::class_<AnhystereticCurve, std::shared_ptr<AnhystereticCurve>>(m, "AnhystereticCurve")
      .def(py::init([](double Ma, double ha, double Mb, double hb) {
             return std::make_shared<AnhystereticCurve>(AnhystereticParams{Ma, ha, Mb, hb});
           }),
           py::arg("Ma") = 1.39, py::arg("ha") = 18.18, py::arg("Mb") = 0.56, py::arg("hb") = 3910.0)
      .def_property_readonly("chi_max", &AnhystereticCurve::chi_max)
      .def("magnetization", py::overload_cast<double>(&AnhystereticCurve::magnetization, py::const_), py::arg("h"))
      .def("flux_density", py::overload_cast<double>(&AnhystereticCurve::flux_density, py::const_), py::arg("h"))
      .def("flux_density_vec", py::overload_cast<const Vec2&>(&AnhystereticCurve::flux_density, py::const_),
           py::arg("H"))
      .def("differential", [](const AnhystereticCurve& c, const Vec2& H) { return c.eval(H).dBdH; }, py::arg("H"))
      .def("invert_magnitude", &AnhystereticCurve::invert_magnitude, py::arg("b"))
      .def("invert", &AnhystereticCurve::invert, py::arg("B"));

  py::class_<PlayConfig, std::shared_ptr<PlayConfig>>(m, "PlayConfig")
      .def(py::init([](std::vector<double> w, std::vector<double> kappa) {
             return std::make_shared<PlayConfig>(std::move(w), std::move(kappa),
                                                 std::make_shared<const AnhystereticCurve>());
           }),
           py::arg("weights"), py::arg("kappa"))
      .def_static("m235_35a", [] { return std::make_shared<PlayConfig>(PlayConfig::m235_35a()); })
      .def_property_readonly("weights", &PlayConfig::weights)
      .def_property_readonly("kappa", &PlayConfig::kappa);

  py::class_<PlayState>(m, "PlayState")
      .def_static("virgin", &PlayState::virgin, py::arg("config"))
      .def_readwrite("Hr", &PlayState::Hr);

  m.def("play_update", &play_update, py::arg("config"), py::arg("state"), py::arg("H"));
  m.def(
      "eval_hyst",
      [](const PlayConfig& cfg, const PlayState& state, const Vec2& H) {
        HystEval ev = eval_hyst(cfg, state, H);
        return py::make_tuple(ev.B, ev.dBdH, ev.state);
      },
      py::arg("config"), py::arg("state"), py::arg("H"), "Returns (B, dB/dH, new state).");
  m.def("prepare_major_branch", &prepare_major_branch, py::arg("config"), py::arg("H_extreme"), py::arg("H_stop"),
        py::arg("steps") = 64);

  m.def(
      "invert",
      [](const PlayConfig& cfg, const PlayState& state, const Vec2& B, const Vec2& H0, const std::string& scheme,
         double tol, int max_iter) {
        InversionSettings s;
        s.scheme = scheme_from(scheme);
        s.tol = tol;
        s.max_iter = max_iter;
        const InversionResult r = invert(cfg, s, state, B, H0);
        py::dict d;
        d["H"] = r.H;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["rel_error"] = r.rel_error;
        return d;
      },
      py::arg("config"), py::arg("state"), py::arg("B"), py::arg("H0"), py::arg("scheme") = "preconditioned",
      py::arg("tol") = 1e-6, py::arg("max_iter") = 20);

  m.def(
      "bench_inversion",
      [](const std::string& scheme, double tol, double h0, int angles, double B, int max_iter) {
        InversionSettings s;
        s.scheme = scheme_from(scheme);
        s.tol = tol;
        s.max_iter = max_iter;
        const SchemeBench r = bench_sweep(PlayConfig::m235_35a(), s, angles, h0, B);
        py::dict d;
        d["mean_iters"] = r.mean_iters;
        d["mean_time_us"] = r.mean_time_us;
        d["converged_fraction"] = r.converged_fraction;
        return d;
      },
      py::arg("scheme"), py::arg("tol"), py::arg("h0"), py::arg("angles") = 360, py::arg("B") = 0.7,
      py::arg("max_iter") = 100);

  m.def(
      "eddy_loss_density",
      [](const Vec2& B_rate, double sigma_fe, double d) {
        return p_eddy(B_rate, SheetParams{sigma_fe, d, true});
      },
      py::arg("B_rate"), py::arg("sigma_fe") = 2e6, py::arg("d") = 0.35e-3);

  m.def("hysteresis_denominator", &hysteresis_denominator);
  m.def("eddy_denominator", &eddy_denominator);
  m.def(
      "aposteriori_density",
      [](const std::vector<Vec2>& B, double dt) {
        const AposterioriDensity d = aposteriori_density(B, dt);
        return py::make_tuple(d.p_hyst, d.p_eddy, d.B_hat);
      },
      py::arg("B"), py::arg("dt"), "Returns (p_hyst, p_eddy, B_hat) for one sampled cycle.");

  m.def(
      "mesh_summary",
      [](double refinement) {
        GeometrySpec g = GeometrySpec::quarter_dipole();
        g.refinement = refinement;
        const Mesh mesh = build_mesh(g);
        py::dict d;
        d["nodes"] = mesh.nodes.size();
        d["triangles"] = mesh.triangles.size();
        d["iron"] = mesh.count(RegionKind::kIron);
        d["conductor"] = mesh.count(RegionKind::kConductor);
        d["air"] = mesh.count(RegionKind::kAir);
        return d;
      },
      py::arg("refinement") = 1.0);

  m.def("simulate", &simulate, py::arg("config_json"), py::arg("threads") = 1,
        "Runs a JSON scenario and returns loss series, dipole probe and per-cycle balance.");
}
