#include "hystermag/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "hystermag/csv.hpp"
#include "hystermag/errors.hpp"

namespace hystermag {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::kAir: return "air";
    case RegionKind::kIron: return "iron";
    case RegionKind::kConductor: return "conductor";
  }
  return "unknown";
}

std::optional<RegionKind> parse_region_kind(std::string_view name) {
  if (name == "air") return RegionKind::kAir;
  if (name == "iron") return RegionKind::kIron;
  if (name == "conductor") return RegionKind::kConductor;
  return std::nullopt;
}

std::optional<EdgeCondition> parse_edge_condition(std::string_view name) {
  if (name == "dirichlet0") return EdgeCondition::kDirichlet0;
  if (name == "neumann") return EdgeCondition::kNeumann;
  return std::nullopt;
}

int GeometrySpec::n_conductors() const {
  int n = 0;
  for (const auto& r : regions) {
    if (r.kind == RegionKind::kConductor) n = std::max(n, r.conductor + 1);
  }
  return n;
}

void GeometrySpec::validate() const {
  if (!(width > 0.0 && height > 0.0)) throw BuildError("geometry: domain must have positive extent");
  if (!(h_background > 0.0)) throw BuildError("geometry: background element size must be positive");
  if (!(refinement > 0.0)) throw BuildError("geometry: refinement must be positive");
  if (left != EdgeCondition::kDirichlet0 && right != EdgeCondition::kDirichlet0 &&
      bottom != EdgeCondition::kDirichlet0 && top != EdgeCondition::kDirichlet0) {
    throw BuildError("geometry: at least one boundary edge must be dirichlet0");
  }
  const double eps = 1e-12 * std::max(width, height);
  for (const auto& r : regions) {
    if (!(r.x1 - r.x0 > eps && r.y1 - r.y0 > eps)) {
      throw BuildError("geometry: region '" + r.name + "' is degenerate");
    }
    if (r.x0 < -eps || r.y0 < -eps || r.x1 > width + eps || r.y1 > height + eps) {
      throw BuildError("geometry: region '" + r.name + "' leaves the domain");
    }
    if (!(r.h > 0.0)) throw BuildError("geometry: region '" + r.name + "' needs a positive element size");
    if (r.kind == RegionKind::kConductor && r.conductor < 0) {
      throw BuildError("geometry: conductor region '" + r.name + "' has no conductor index");
    }
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      const auto& a = regions[i];
      const auto& b = regions[j];
      const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
      const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
      if (ox > eps && oy > eps) {
        throw BuildError("geometry: regions '" + a.name + "' and '" + b.name + "' overlap");
      }
    }
  }
  const int n = n_conductors();
  for (int m = 0; m < n; ++m) {
    const bool present = std::any_of(regions.begin(), regions.end(), [m](const RegionRect& r) {
      return r.kind == RegionKind::kConductor && r.conductor == m;
    });
    if (!present) throw BuildError("geometry: conductor indices must be contiguous from 0");
  }
}

GeometrySpec GeometrySpec::quarter_dipole() {
  GeometrySpec g;
  g.width = 0.17;
  g.height = 0.15;
  g.h_background = 0.008;
  constexpr double half_gap = 0.0175;
  constexpr double pole_half_width = 0.040;
  constexpr double window_top = 0.0575;
  constexpr double leg_x0 = 0.075;
  constexpr double leg_x1 = 0.125;
  constexpr double beam_top = 0.1075;
  g.regions = {
      {"gap", RegionKind::kAir, 0.0, 0.0, pole_half_width, half_gap, 0.0025, -1},
      {"pole", RegionKind::kIron, 0.0, half_gap, pole_half_width, window_top, 0.005, -1},
      {"beam", RegionKind::kIron, 0.0, window_top, leg_x1, beam_top, 0.005, -1},
      {"leg", RegionKind::kIron, leg_x0, 0.0, leg_x1, window_top, 0.005, -1},
      {"conductor0", RegionKind::kConductor, 0.045, 0.020, 0.055, 0.030, 0.0025, 0},
      {"conductor1", RegionKind::kConductor, 0.045, 0.036, 0.055, 0.046, 0.0025, 1},
  };
  g.left = EdgeCondition::kDirichlet0;
  g.right = EdgeCondition::kDirichlet0;
  g.top = EdgeCondition::kDirichlet0;
  g.bottom = EdgeCondition::kNeumann;
  return g;
}

GeometrySpec GeometrySpec::unit_square(double h) {
  GeometrySpec g;
  g.width = 1.0;
  g.height = 1.0;
  g.h_background = h;
  g.left = g.right = g.bottom = g.top = EdgeCondition::kDirichlet0;
  return g;
}

double Mesh::area(int tri) const {
  const auto& t = triangles[static_cast<std::size_t>(tri)].nodes;
  const Vec2 e1 = nodes[t[1]] - nodes[t[0]];
  const Vec2 e2 = nodes[t[2]] - nodes[t[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Vec2 Mesh::centroid(int tri) const {
  const auto& t = triangles[static_cast<std::size_t>(tri)].nodes;
  return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
}

int Mesh::locate(const Vec2& p) const {
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i].nodes;
    const Vec2& a = nodes[t[0]];
    const Vec2& b = nodes[t[1]];
    const Vec2& c = nodes[t[2]];
    const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const double l1 = ((p - a).x() * (c - a).y() - (p - a).y() * (c - a).x()) / det;
    const double l2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / det;
    const double l0 = 1.0 - l1 - l2;
    constexpr double tol = -1e-10;
    if (l0 >= tol && l1 >= tol && l2 >= tol) return static_cast<int>(i);
  }
  return -1;
}

std::size_t Mesh::count(RegionKind kind) const {
  return static_cast<std::size_t>(std::count_if(triangles.begin(), triangles.end(),
                                                [kind](const Triangle& t) { return t.region == kind; }));
}

namespace {

// Grid lines along one axis: all region breaks, each interval subdivided to
// the smallest target size of the regions spanning it.
std::vector<double> grid_lines(double length, const std::vector<RegionRect>& regions, double h_bg,
                               double refinement, bool along_x) {
  const double eps = 1e-12 * length;
  std::vector<double> breaks{0.0, length};
  for (const auto& r : regions) {
    breaks.push_back(along_x ? r.x0 : r.y0);
    breaks.push_back(along_x ? r.x1 : r.y1);
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> unique;
  for (double b : breaks) {
    if (unique.empty() || b - unique.back() > eps) unique.push_back(b);
  }
  std::vector<double> lines{unique.front()};
  for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
    const double a = unique[i];
    const double b = unique[i + 1];
    double h = h_bg;
    for (const auto& r : regions) {
      const double lo = along_x ? r.x0 : r.y0;
      const double hi = along_x ? r.x1 : r.y1;
      if (lo < b - eps && hi > a + eps) h = std::min(h, r.h);
    }
    h *= refinement;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
    for (int k = 1; k <= n; ++k) lines.push_back(a + (b - a) * k / n);
  }
  return lines;
}

}  // namespace

Mesh build_mesh(const GeometrySpec& geom) {
  geom.validate();
  const auto xs = grid_lines(geom.width, geom.regions, geom.h_background, geom.refinement, true);
  const auto ys = grid_lines(geom.height, geom.regions, geom.h_background, geom.refinement, false);
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());

  Mesh mesh;
  mesh.n_conductors = geom.n_conductors();
  mesh.nodes.reserve(static_cast<std::size_t>(nx) * ny);
  mesh.dirichlet.assign(static_cast<std::size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.nodes.emplace_back(xs[i], ys[j]);
      const bool fixed = (i == 0 && geom.left == EdgeCondition::kDirichlet0) ||
                         (i == nx - 1 && geom.right == EdgeCondition::kDirichlet0) ||
                         (j == 0 && geom.bottom == EdgeCondition::kDirichlet0) ||
                         (j == ny - 1 && geom.top == EdgeCondition::kDirichlet0);
      mesh.dirichlet[static_cast<std::size_t>(j) * nx + i] = fixed ? 1 : 0;
    }
  }

  auto node = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const Vec2 center(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
      RegionKind kind = RegionKind::kAir;
      int conductor = -1;
      for (const auto& r : geom.regions) {
        if (center.x() > r.x0 && center.x() < r.x1 && center.y() > r.y0 && center.y() < r.y1) {
          kind = r.kind;
          conductor = r.kind == RegionKind::kConductor ? r.conductor : -1;
          break;
        }
      }
      const int n00 = node(i, j), n10 = node(i + 1, j), n01 = node(i, j + 1), n11 = node(i + 1, j + 1);
      // Alternate the diagonal so the pattern has no preferred direction.
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({{n00, n10, n11}, kind, conductor});
        mesh.triangles.push_back({{n00, n11, n01}, kind, conductor});
      } else {
        mesh.triangles.push_back({{n00, n10, n01}, kind, conductor});
        mesh.triangles.push_back({{n10, n11, n01}, kind, conductor});
      }
    }
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.area(static_cast<int>(t)) > 0.0)) throw BuildError("mesh: non-positive triangle area");
    if (mesh.triangles[t].region == RegionKind::kIron) mesh.iron_points.push_back(static_cast<int>(t));
  }
  return mesh;
}

void write_nodes_csv(const Mesh& mesh, std::ostream& out, std::string_view metadata) {
  CsvWriter csv(out, metadata);
  csv.header({"node", "x_m", "y_m", "dirichlet"});
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    csv.row(i, mesh.nodes[i].x(), mesh.nodes[i].y(), static_cast<int>(mesh.dirichlet[i]));
  }
}

void write_elements_csv(const Mesh& mesh, std::ostream& out, std::string_view metadata) {
  CsvWriter csv(out, metadata);
  csv.header({"element", "n0", "n1", "n2", "region", "conductor"});
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    csv.row(i, t.nodes[0], t.nodes[1], t.nodes[2], to_string(t.region), t.conductor);
  }
}

}  // namespace hystermag
