#pragma once

#include <vector>

#include "hystermag/types.hpp"

namespace hystermag {

/// Langevin function coth(x) - 1/x, odd in x.
double langevin(double x);
/// dL/dx, even in x.
double langevin_derivative(double x);
/// ln(sinh(x)/x), the antiderivative of L. Even in x.
double log_sinhc(double x);

/// Double-Langevin parameters. Defaults are the M235-35A fit.
struct AnhystereticParams {
  double Ma_T = 1.39;
  double ha_Apm = 18.18;
  double Mb_T = 0.56;
  double hb_Apm = 3910.0;
};

struct AnhystereticEval {
  Vec2 M;     ///< mu0*M in T
  Mat2 dBdH;  ///< dB/dH including the vacuum part, T per A/m
};

/// Isotropic anhysteretic law
///   |mu0 M_an|(h) = Ma L(h/ha) + Mb L(h/hb)
/// with a monotone lookup table for the inverse B -> H.
///
/// Immutable after construction and safe to share between threads.
class AnhystereticCurve {
 public:
  static constexpr int kDefaultLutSamples = 10000;
  static constexpr double kLutMinField = 1e-3;
  static constexpr double kLutMaxField = 1e6;

  explicit AnhystereticCurve(const AnhystereticParams& params = {},
                             int lut_samples = kDefaultLutSamples);

  const AnhystereticParams& params() const { return params_; }

  /// Small-field susceptibility Ma/(3 mu0 ha) + Mb/(3 mu0 hb).
  double chi_max() const { return chi_max_; }
  double saturation_T() const { return params_.Ma_T + params_.Mb_T; }

  /// |mu0 M_an| as a function of |H|.
  double magnetization(double h) const;
  /// d|mu0 M_an| / d|H|.
  double magnetization_slope(double h) const;
  /// |mu0 M_an| / |H|, with the analytic limit mu0*chi_max at h = 0.
  double secant_susceptibility(double h) const;
  /// |B_an| = mu0 h + |mu0 M_an|(h).
  double flux_density(double h) const { return kMu0 * h + magnetization(h); }

  /// Stored energy density of a cell with reversible field h:
  /// h*|mu0 M_an|(h) - int_0^h |mu0 M_an| dh'. Satisfies d(psi) = h d(mu0 M).
  double cell_energy(double h) const;

  AnhystereticEval eval(const Vec2& H) const;
  /// Magnetization only (mu0*M_an in T).
  Vec2 magnetization(const Vec2& H) const;
  /// B_an = mu0 H + mu0 M_an(H).
  Vec2 flux_density(const Vec2& H) const;

  /// Inverse of the scalar map |H| -> |B_an|; LUT lookup plus one Newton polish.
  double invert_magnitude(double b) const;
  /// H such that B_an(H) = B. Throws OutOfRange beyond the table.
  Vec2 invert(const Vec2& B) const;

  double max_invertible_B() const { return lut_b_.back(); }

 private:
  AnhystereticParams params_;
  double chi_max_;
  std::vector<double> lut_h_;
  std::vector<double> lut_b_;
};

}  // namespace hystermag
