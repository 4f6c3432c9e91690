#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hystermag/config.hpp"

namespace hystermag {

struct SimulationOutput {
  SolutionArchive archive;
  LossSeries losses;
  ResistiveSeries resistive;
  std::vector<CycleBalance> balance;
  AposterioriLosses aposteriori;
  DipoleSeries dipole;
  std::optional<DipoleSeries> reference;  ///< hysteretic-dynamic run of the same config
};

/// Runs the configured scenario. With `with_reference` the same scenario is
/// also run with the dynamic hysteretic model for the dipole comparison.
SimulationOutput run_simulation(const RunConfig& config, int threads, bool with_reference = false);

/// Writes losses.csv, balance.csv, probe_dipole.csv, probe_bh_<label>.csv
/// and aposteriori.csv into `dir` (created if missing). Throws if `dir`
/// holds files and `force` is false.
void write_simulation(const RunConfig& config, const SimulationOutput& out, const std::filesystem::path& dir,
                      bool force);

/// Human-readable run summary (step count, Newton iterations, timings).
std::string simulation_log(const RunConfig& config, const SimulationOutput& out);

}  // namespace hystermag
