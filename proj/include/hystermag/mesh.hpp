#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hystermag/types.hpp"

namespace hystermag {

enum class RegionKind { kAir, kIron, kConductor };
enum class EdgeCondition { kDirichlet0, kNeumann };

std::string_view to_string(RegionKind kind);
std::optional<RegionKind> parse_region_kind(std::string_view name);
std::optional<EdgeCondition> parse_edge_condition(std::string_view name);

/// Axis-aligned region of the 2-D cross-section, extents in m.
struct RegionRect {
  std::string name;
  RegionKind kind = RegionKind::kAir;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double h = 0.0;       ///< target element size, m
  int conductor = -1;   ///< conductor index for kConductor
};

/// Rectangular domain [0, width] x [0, height]; area not covered by a region
/// is air meshed with `h_background`.
struct GeometrySpec {
  double width = 0.0;
  double height = 0.0;
  double h_background = 0.0;
  std::vector<RegionRect> regions;
  EdgeCondition left = EdgeCondition::kDirichlet0;
  EdgeCondition right = EdgeCondition::kDirichlet0;
  EdgeCondition bottom = EdgeCondition::kNeumann;
  EdgeCondition top = EdgeCondition::kDirichlet0;
  /// Multiplies every target size; 0.5 halves all element sizes.
  double refinement = 1.0;

  int n_conductors() const;
  void validate() const;

  /// Quarter model of an H-type dipole: pole, top beam and return leg of
  /// iron, two solid conductor bars in the window, air gap below the pole.
  /// a = 0 on the vertical symmetry cut and the outer boundary, natural
  /// condition on the horizontal midplane.
  static GeometrySpec quarter_dipole();
  static GeometrySpec unit_square(double h);
};

struct Triangle {
  std::array<int, 3> nodes;
  RegionKind region = RegionKind::kAir;
  int conductor = -1;
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Triangle> triangles;
  std::vector<char> dirichlet;  ///< per node
  std::vector<int> iron_points; ///< triangles of the iron region (one integration point each)
  int n_conductors = 0;

  double area(int tri) const;
  Vec2 centroid(int tri) const;
  /// First triangle containing p (boundary inclusive), or -1.
  int locate(const Vec2& p) const;
  std::size_t count(RegionKind kind) const;
};

/// Conforming triangulation of the tensor grid through all region edges;
/// each grid interval is split to the smallest target size of the regions it
/// crosses, each cell into two triangles.
Mesh build_mesh(const GeometrySpec& geom);

void write_nodes_csv(const Mesh& mesh, std::ostream& out, std::string_view metadata = {});
void write_elements_csv(const Mesh& mesh, std::ostream& out, std::string_view metadata = {});

}  // namespace hystermag
