#pragma once

#include <numbers>

#include <Eigen/Core>
#include <Eigen/LU>

namespace hystermag {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Vacuum permeability in H/m.
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double kNu0 = 1.0 / kMu0;

}  // namespace hystermag
