#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hystermag/postproc.hpp"
#include "hystermag/transient.hpp"

namespace hystermag {

/// Contents of a simulate configuration file (JSON).
///
/// Top-level keys: name, geometry, material, anhysteretic, hysteresis,
/// dynamic, excitation (required), time (required: dt, duration), probes,
/// solver, threads, report. Unknown keys are rejected.
struct RunConfig {
  std::string name = "run";
  GeometrySpec geometry = GeometrySpec::quarter_dipole();
  MaterialModel model;
  CircuitSpec circuit;
  double dt = 1e-5;
  double duration = 0.0;
  Vec2 dipole_point = Vec2::Zero();
  std::vector<Probe> probes;  ///< BH probes (iron)
  SolverSettings solver;
  int threads = 0;            ///< 0: not set in the file
  ReportScale scale;
  AposterioriParams aposteriori;

  TransientProblem problem() const;
};

/// Throws ConfigError carrying the JSON pointer of the offending key.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Short "law-static|dynamic" tag of a material model.
std::string model_tag(const MaterialModel& model);

}  // namespace hystermag
