#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hystermag/transient.hpp"

namespace hystermag {

/// Reported quantities are per metre of the full magnet: quarter-model
/// integrals times `symmetry` (default 4).
struct ReportScale {
  double symmetry = 4.0;
};

/// Per-step power series, W/m; w_mag is the stored magnetic energy, J/m.
struct LossSeries {
  std::vector<double> t;
  std::vector<double> p_input;
  std::vector<double> p_res;
  std::vector<double> p_eddy;
  std::vector<double> p_hyst;
  std::vector<double> w_mag;
};

/// Joule loss of the conductors in two forms: int sigma |E|^2 over the bars
/// and the terminal form sum u i - (v, H) . da/dt.
struct ResistiveSeries {
  std::vector<double> p_field;
  std::vector<double> p_terminal;
};

ResistiveSeries resistive_loss(const SolutionArchive& archive, ReportScale scale = {});
LossSeries loss_series(const SolutionArchive& archive, ReportScale scale = {});

/// Energy (J/m) of each channel accumulated over the steps with t in (t0, t1].
struct ChannelEnergy {
  double input = 0.0;
  double resistive = 0.0;
  double eddy = 0.0;
  double hyst = 0.0;
  double storage = 0.0;
  double storage_state = 0.0;
};
ChannelEnergy channel_energy(const SolutionArchive& archive, double t0, double t1, ReportScale scale = {});

/// Steps per source cycle; 0 when the source is not periodic.
int steps_per_cycle(const SolutionArchive& archive);
/// Number of complete source cycles in the archive.
int full_cycles(const SolutionArchive& archive);

struct AposterioriParams {
  double gamma = 7600.0;      ///< mass density, kg/m^3
  double k_hyst = 13.88e-3;   ///< W/(kg Hz T^2)
  double k_eddy = 44.77e-6;   ///< W/(kg Hz^2 T^2)
};

/// (1/2pi) int_0^2pi |2pi cos t| dt = 4, by Gauss-Legendre quadrature.
double hysteresis_denominator();
/// (1/2pi) int_0^2pi (2pi cos t)^2 dt = 2 pi^2, by Gauss-Legendre quadrature.
double eddy_denominator();

/// Amplitude of a sampled vector trajectory: half the largest distance
/// between any two samples.
double half_peak_to_peak(const std::vector<Vec2>& B);

struct AposterioriDensity {
  double B_hat = 0.0;
  double p_hyst = 0.0;  ///< W/m^3
  double p_eddy = 0.0;
};

/// Time-averaged densities for one cycle sampled at B_0..B_N (T = N dt).
AposterioriDensity aposteriori_density(const std::vector<Vec2>& B, double dt, const AposterioriParams& params = {});

struct AposterioriLosses {
  int cycle = 0;            ///< 0-based cycle used
  double period = 0.0;
  double p_hyst = 0.0;      ///< W/m
  double p_eddy = 0.0;
  double e_hyst = 0.0;      ///< J/m per cycle
  double e_eddy = 0.0;
  std::string warning;      ///< set when no periodic cycle was found
};

/// Volume integral of the estimates over the iron for one source cycle
/// (default: the last full one).
AposterioriLosses aposteriori_losses(const SolutionArchive& archive, const AposterioriParams& params = {},
                                     int cycle = -1, ReportScale scale = {});

struct DipoleSeries {
  std::vector<double> t;
  std::vector<double> By;
};

/// B_y at `point` for every archived time (element-wise constant field).
DipoleSeries probe_dipole(const SolutionArchive& archive, const Vec2& point);
/// |By - By_ref| / max|By_ref|, sample by sample.
std::vector<double> relative_difference(const DipoleSeries& run, const DipoleSeries& reference);

struct BhLocus {
  std::vector<double> t;
  std::vector<Vec2> B;
  std::vector<Vec2> H;
  std::vector<double> dissipation;  ///< per step, J/m^3
};

/// Locus of the named iron probe, starting from the zero initial state.
BhLocus probe_bh(const SolutionArchive& archive, std::string_view label);
/// Trapezoidal int H . dB over samples [first, last].
double loop_area(const BhLocus& locus, std::size_t first, std::size_t last);

/// Dissipated energy density at a probe split by the sign of the source
/// slope over a step range.
struct BranchDissipation {
  double rising = 0.0;
  double falling = 0.0;
};
BranchDissipation branch_dissipation(const SolutionArchive& archive, std::string_view label,
                                     std::size_t first_step, std::size_t last_step);

struct CycleBalance {
  int cycle = 0;
  double t0 = 0.0, t1 = 0.0;
  ChannelEnergy energy;
  double defect = 0.0;                 ///< input - (storage + resistive + eddy + hyst)
  double relative_defect = 0.0;        ///< |defect| / |input|
  double numerical_dissipation = 0.0;  ///< storage - storage_state
};

/// One row per source cycle (a single row for aperiodic sources).
std::vector<CycleBalance> energy_balance(const SolutionArchive& archive, ReportScale scale = {});

void write_losses_csv(const LossSeries& losses, std::ostream& out, std::string_view metadata = {});
void write_dipole_csv(const DipoleSeries& series, const DipoleSeries* reference, std::ostream& out,
                      std::string_view metadata = {});
void write_bh_csv(const BhLocus& locus, std::ostream& out, std::string_view metadata = {});
void write_balance_csv(const std::vector<CycleBalance>& rows, std::ostream& out, std::string_view metadata = {});

}  // namespace hystermag
