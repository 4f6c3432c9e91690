#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hystermag/hysteresis.hpp"

namespace hystermag {

/// kSafeguarded: Newton step with backtracking on |B - B*|, falling back to
/// the preconditioned update when no trial step reduces the residual.
enum class InversionScheme { kDirect, kNewton, kPreconditioned, kSafeguarded };

std::string_view to_string(InversionScheme scheme);
/// Accepts "direct", "newton", "preconditioned" (or "precond"), "safeguarded".
std::optional<InversionScheme> parse_scheme(std::string_view name);

struct InversionSettings {
  InversionScheme scheme = InversionScheme::kPreconditioned;
  /// Target for |B(H_n) - B*| / max(|B*|, b_floor).
  double tol = 1e-6;
  int max_iter = 20;
  /// Maximum relative differential permeability used by the direct scheme;
  /// <= 0 selects 1 + chi_max of the curve.
  double mu_r_max = 0.0;
  /// Floor for the residual normalisation in T; keeps targets near B* = 0
  /// well-posed. Zero gives the plain relative error (1 T when B* = 0).
  double b_floor = 0.0;

  void validate() const;
};

struct InversionResult {
  Vec2 H;
  int iterations = 0;
  bool converged = false;
  double rel_error = 0.0;
};

/// Solves B(H) = B* for the hysteretic model with every candidate evaluated
/// against the fixed state `prev` (the state is not advanced).
///
/// Iteration 0 is the residual check at H0; each further iteration is one
/// application of the fixed-point map
///   direct:          H - g / (mu0 mu_r_max)
///   newton:          H - (dB/dH)^-1 g        (no relaxation)
///   preconditioned:  H - (B_an^-1(B(H)) - B_an^-1(B*))
/// with g = B(H) - B*. On failure the best iterate is returned with
/// converged = false.
InversionResult invert(const PlayConfig& cfg, const InversionSettings& settings,
                       const PlayState& prev, const Vec2& B_star, const Vec2& H0);

struct SchemeBench {
  InversionScheme scheme;
  double tol;
  double h0_Apm;
  double mean_iters;
  double mean_time_us;  ///< negative when not timed (parallel mode)
  double converged_fraction;
};

struct BenchReport {
  int n_angles = 0;
  double B_mag_T = 0.0;
  std::vector<SchemeBench> rows;
};

/// Table-style inversion benchmark: for n_angles directions e_theta the point
/// is prepared on the ascending major branch (from -H_prep e_theta back to
/// zero), then B* = B_mag e_theta is inverted from H0 = h0 e_theta.
/// Runs serially so the per-problem time is meaningful.
SchemeBench bench_sweep(const PlayConfig& cfg, const InversionSettings& settings, int n_angles,
                        double h0_Apm, double B_mag_T, double H_prep_Apm = 1e4);

/// Same problems on `threads` workers; reports iteration counts only.
SchemeBench bench_sweep_parallel(const PlayConfig& cfg, const InversionSettings& settings,
                                 int n_angles, double h0_Apm, double B_mag_T, int threads,
                                 double H_prep_Apm = 1e4);

/// Writes scheme,tol,h0_Apm,mean_iters,mean_time_us rows.
std::string bench_csv(const BenchReport& report, std::string_view metadata = {});

}  // namespace hystermag
