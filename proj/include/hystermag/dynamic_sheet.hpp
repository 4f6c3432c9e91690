#pragma once

#include "hystermag/types.hpp"

namespace hystermag {

/// Thin-sheet lamination parameters. The eddy-current field term is
/// c * dB/dt with c = sigma_fe d^2 / 12.
struct SheetParams {
  double sigma_fe = 2.0e6;  ///< S/m
  double d = 0.35e-3;       ///< m
  bool enabled = true;

  double coefficient() const { return sigma_fe * d * d / 12.0; }
  void validate() const;
};

/// H_surf = H_static + c dB/dt.
Vec2 h_surf(const Vec2& static_H, const Vec2& B_dot, const SheetParams& params);

/// Classical lamination eddy-current loss density c |dB/dt|^2 in W/m^3.
double p_eddy(const Vec2& B_dot, const SheetParams& params);

}  // namespace hystermag
