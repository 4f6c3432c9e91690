#include "hystermag/simulate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hystermag/csv.hpp"
#include "hystermag/errors.hpp"

namespace hystermag {

SimulationOutput run_simulation(const RunConfig& config, int threads, bool with_reference) {
  TransientProblem problem = config.problem();
  if (threads > 0) problem.solver.threads = threads;
  auto mesh = std::make_shared<const Mesh>(build_mesh(problem.geometry));

  SimulationOutput out;
  out.archive = transient_solve(problem, mesh);
  out.losses = loss_series(out.archive, config.scale);
  out.resistive = resistive_loss(out.archive, config.scale);
  out.balance = energy_balance(out.archive, config.scale);
  out.aposteriori = aposteriori_losses(out.archive, config.aposteriori, -1, config.scale);
  out.dipole = probe_dipole(out.archive, config.dipole_point);
  if (with_reference) {
    if (config.model.law == IronLaw::kHysteretic && config.model.dynamic) {
      out.reference = out.dipole;
    } else {
      TransientProblem ref = problem;
      ref.model.law = IronLaw::kHysteretic;
      ref.model.dynamic = true;
      ref.probes.clear();
      out.reference = probe_dipole(transient_solve(ref, mesh), config.dipole_point);
    }
  }
  return out;
}

void write_simulation(const RunConfig& config, const SimulationOutput& out, const std::filesystem::path& dir,
                      bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw InvalidInput(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw InvalidInput("output directory " + dir.string() + " is not empty (use --force to overwrite)");
    }
  } else {
    fs::create_directories(dir);
  }
  const auto& a = out.archive;
  std::ostringstream meta;
  meta << "simulate name=" << config.name << " model=" << model_tag(a.model) << " dt=" << format_double(a.dt)
       << " steps=" << a.steps.size() << " symmetry=" << format_double(config.scale.symmetry);
  const std::string metadata = run_metadata(meta.str());

  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InvalidInput("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("losses.csv");
    write_losses_csv(out.losses, f, metadata);
  }
  {
    auto f = open("balance.csv");
    write_balance_csv(out.balance, f, metadata);
  }
  {
    auto f = open("probe_dipole.csv");
    write_dipole_csv(out.dipole, out.reference ? &*out.reference : nullptr, f, metadata);
  }
  for (const auto& p : a.probes) {
    auto f = open("probe_bh_" + p.label + ".csv");
    write_bh_csv(probe_bh(a, p.label), f, metadata);
  }
  {
    auto f = open("aposteriori.csv");
    CsvWriter csv(f, metadata);
    csv.header({"cycle", "period", "p_hyst", "p_eddy", "e_hyst", "e_eddy"});
    const auto& ap = out.aposteriori;
    csv.row(ap.cycle, ap.period, ap.p_hyst, ap.p_eddy, ap.e_hyst, ap.e_eddy);
  }
}

std::string simulation_log(const RunConfig& config, const SimulationOutput& out) {
  const auto& a = out.archive;
  int max_substeps = 1;
  for (const auto& s : a.steps) max_substeps = std::max(max_substeps, s.substeps);
  std::ostringstream log;
  log << "name: " << config.name << '\n'
      << "model: " << model_tag(a.model) << '\n'
      << "nodes: " << a.mesh->nodes.size() << "  triangles: " << a.mesh->triangles.size()
      << "  iron points: " << a.mesh->count(RegionKind::kIron) << '\n'
      << "steps: " << a.steps.size() << "  dt: " << a.dt << " s\n"
      << "newton iterations: " << a.newton_total << "  max substeps: " << max_substeps << '\n'
      << "wall time: " << a.wall_seconds << " s  material: " << a.material_seconds << " s\n";
  for (const auto& row : out.balance) {
    const auto& e = row.energy;
    log << "cycle " << row.cycle << ": input " << e.input << " J/m, resistive " << e.resistive << ", eddy "
        << e.eddy << ", hyst " << e.hyst << ", dW " << e.storage << ", closure " << row.relative_defect << '\n';
  }
  if (!out.aposteriori.warning.empty()) log << "warning: " << out.aposteriori.warning << '\n';
  log << "a-posteriori (cycle " << out.aposteriori.cycle << "): hyst " << out.aposteriori.p_hyst << " W/m, eddy "
      << out.aposteriori.p_eddy << " W/m\n";
  return log.str();
}

}  // namespace hystermag
