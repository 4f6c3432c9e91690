// Command-line front end: simulate, bench-inversion, bench-runtime, mesh-export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hystermag/config.hpp"
#include "hystermag/csv.hpp"
#include "hystermag/errors.hpp"
#include "hystermag/inversion.hpp"
#include "hystermag/runtime_bench.hpp"
#include "hystermag/simulate.hpp"

namespace fs = std::filesystem;
using namespace hystermag;

namespace {

// --threads, then HYSTERMAG_THREADS, then the config file, then 1.
int resolve_threads(int flag, int from_config) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("HYSTERMAG_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InvalidInput("HYSTERMAG_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return from_config > 0 ? from_config : 1;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << text;
  if (!f) throw InvalidInput("write failed: " + path.string());
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool force, int threads_flag,
                 bool reference) {
  const RunConfig cfg = load_run_config(config_path);
  const int threads = resolve_threads(threads_flag, cfg.threads);
  const SimulationOutput out = run_simulation(cfg, threads, reference);
  write_simulation(cfg, out, out_dir, force);
  const std::string log = simulation_log(cfg, out) + "threads: " + std::to_string(threads) + '\n';
  write_text(fs::path(out_dir) / "run.log", log);
  std::cerr << log;
  return 0;
}

int cmd_bench_inversion(const std::vector<double>& tols, const std::vector<double>& h0s, int angles,
                        const std::string& scheme, double B_mag, int max_iter, const std::string& out) {
  std::vector<InversionScheme> schemes;
  if (scheme == "all") {
    schemes = {InversionScheme::kDirect, InversionScheme::kNewton, InversionScheme::kPreconditioned};
  } else if (auto s = parse_scheme(scheme)) {
    schemes = {*s};
  } else {
    throw CLI::ValidationError("--scheme", "unknown scheme '" + scheme + "'");
  }
  const PlayConfig cfg = PlayConfig::m235_35a();
  BenchReport report;
  report.n_angles = angles;
  report.B_mag_T = B_mag;
  for (auto s : schemes) {
    for (double h0 : h0s) {
      for (double tol : tols) {
        InversionSettings settings;
        settings.scheme = s;
        settings.tol = tol;
        settings.max_iter = max_iter;
        report.rows.push_back(bench_sweep(cfg, settings, angles, h0, B_mag));
      }
    }
  }
  std::ostringstream meta;
  meta << "bench-inversion angles=" << angles << " B=" << format_double(B_mag) << " max_iter=" << max_iter;
  write_text(out, bench_csv(report, run_metadata(meta.str())));
  return 0;
}

int cmd_bench_runtime(const std::vector<double>& refinements, const std::vector<int>& thread_counts, int steps,
                      const std::string& law, bool dynamic, const std::string& out) {
  RuntimeSettings settings;
  settings.steps = steps;
  settings.dynamic = dynamic;
  if (law == "hysteretic") {
    settings.law = IronLaw::kHysteretic;
  } else if (law == "anhysteretic") {
    settings.law = IronLaw::kAnhysteretic;
  } else {
    throw CLI::ValidationError("--law", "expected hysteretic or anhysteretic");
  }
  std::vector<RuntimeSample> rows;
  for (int threads : thread_counts) {
    for (double r : refinements) {
      rows.push_back(runtime_sample(GeometrySpec::quarter_dipole(), r, threads, settings));
      std::cerr << "refinement " << r << " threads " << threads << ": " << rows.back().n_int_fe << " points, "
                << rows.back().material_seconds << " s material\n";
    }
  }
  std::ostringstream meta;
  meta << "bench-runtime steps=" << steps << " newton=" << settings.fixed_newton;
  write_text(out, runtime_csv(rows, run_metadata(meta.str())));
  for (int threads : thread_counts) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.threads != threads) continue;
      x.push_back(static_cast<double>(r.n_int_fe));
      y.push_back(r.material_seconds / (r.steps * (r.newton + 1)));
    }
    if (x.size() >= 2) {
      const LinearFit fit = fit_line(x, y);
      std::cerr << "threads " << threads << ": material time per evaluation sweep = " << fit.slope * 1e6
                << " us/point * N + " << fit.intercept * 1e3 << " ms\n";
    }
  }
  return 0;
}

int cmd_mesh_export(const std::string& config_path, double refinement, const std::string& out_dir, bool force) {
  GeometrySpec g = config_path.empty() ? GeometrySpec::quarter_dipole() : load_run_config(config_path).geometry;
  if (refinement > 0.0) g.refinement = refinement;
  const Mesh mesh = build_mesh(g);
  const fs::path dir(out_dir);
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw InvalidInput("output directory " + dir.string() + " is not empty (use --force to overwrite)");
  }
  fs::create_directories(dir);
  std::ostringstream meta;
  meta << "mesh-export refinement=" << format_double(g.refinement) << " nodes=" << mesh.nodes.size()
       << " triangles=" << mesh.triangles.size();
  const std::string metadata = run_metadata(meta.str());
  {
    std::ofstream f(dir / "nodes.csv", std::ios::binary);
    write_nodes_csv(mesh, f, metadata);
  }
  {
    std::ofstream f(dir / "elements.csv", std::ios::binary);
    write_elements_csv(mesh, f, metadata);
  }
  std::cerr << mesh.nodes.size() << " nodes, " << mesh.triangles.size() << " triangles ("
            << mesh.count(RegionKind::kIron) << " iron)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient 2-D magnet simulation with vector hysteresis"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a transient scenario from a JSON config");
  std::string config_path, out_dir;
  bool force = false, reference = false;
  int threads = 0;
  sim->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--output", out_dir, "Output directory")->required();
  sim->add_flag("--force", force, "Overwrite a non-empty output directory");
  sim->add_option("--threads", threads, "Material-evaluation threads (default: $HYSTERMAG_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  sim->add_flag("--reference", reference, "Also run the dynamic hysteretic model and compare the dipole field");

  auto* binv = app.add_subcommand("bench-inversion", "Iteration counts of the inverse hysteresis schemes");
  std::vector<double> tols{1e-3, 1e-6, 1e-9}, h0s{100.0, 1000.0};
  int angles = 36000, max_iter = 100;
  std::string scheme = "all", bench_out = "-";
  double B_mag = 0.7;
  binv->add_option("--tol", tols, "Relative tolerances")->delimiter(',');
  binv->add_option("--h0", h0s, "Initial guess magnitudes in A/m")->delimiter(',');
  binv->add_option("--angles", angles, "Number of field directions")->check(CLI::PositiveNumber);
  binv->add_option("--scheme", scheme, "all, direct, newton, preconditioned or safeguarded");
  binv->add_option("--B", B_mag, "Target flux density magnitude in T");
  binv->add_option("--max-iter", max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  binv->add_option("-o,--output", bench_out, "Output CSV (default stdout)");

  auto* brt = app.add_subcommand("bench-runtime", "Material-evaluation time against mesh size and threads");
  std::vector<double> refinements{1.0, 0.7071067811865476, 0.5};
  std::vector<int> thread_counts{1};
  int steps = 20;
  std::string law = "hysteretic", runtime_out = "-";
  bool dynamic = false;
  brt->add_option("--refinements", refinements, "Element-size factors")->delimiter(',');
  brt->add_option("--threads", thread_counts, "Thread counts")->delimiter(',');
  brt->add_option("--steps", steps, "Time steps per sample")->check(CLI::PositiveNumber);
  brt->add_option("--law", law, "hysteretic or anhysteretic");
  brt->add_flag("--dynamic", dynamic, "Include the lamination eddy-current term");
  brt->add_option("-o,--output", runtime_out, "Output CSV (default stdout)");

  auto* mexp = app.add_subcommand("mesh-export", "Write the mesh as nodes/elements CSV");
  std::string mesh_config, mesh_out;
  double refinement = 0.0;
  bool mesh_force = false;
  mexp->add_option("--config", mesh_config, "Take the geometry from a run config")->check(CLI::ExistingFile);
  mexp->add_option("--refinement", refinement, "Element-size factor");
  mexp->add_option("-o,--output", mesh_out, "Output directory")->required();
  mexp->add_flag("--force", mesh_force, "Overwrite a non-empty output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(config_path, out_dir, force, threads, reference);
    if (*binv) return cmd_bench_inversion(tols, h0s, angles, scheme, B_mag, max_iter, bench_out);
    if (*brt) {
      for (int t : thread_counts) {
        if (t < 1) throw CLI::ValidationError("--threads", "thread counts must be >= 1");
      }
      return cmd_bench_runtime(refinements, thread_counts, steps, law, dynamic, runtime_out);
    }
    if (*mexp) return cmd_mesh_export(mesh_config, refinement, mesh_out, mesh_force);
  } catch (const CLI::Error& ex) {
    return app.exit(ex);
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
