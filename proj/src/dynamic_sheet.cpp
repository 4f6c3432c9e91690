#include "hystermag/dynamic_sheet.hpp"

#include <cmath>

#include "hystermag/errors.hpp"

namespace hystermag {

void SheetParams::validate() const {
  if (!(sigma_fe >= 0.0) || !std::isfinite(sigma_fe)) throw InvalidInput("sheet: sigma_fe must be >= 0");
  if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("sheet: thickness must be positive");
}

Vec2 h_surf(const Vec2& static_H, const Vec2& B_dot, const SheetParams& params) {
  return static_H + params.coefficient() * B_dot;
}

double p_eddy(const Vec2& B_dot, const SheetParams& params) {
  return params.coefficient() * B_dot.squaredNorm();
}

}  // namespace hystermag
