#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hystermag/errors.hpp"
#include "hystermag/fem.hpp"

using namespace hystermag;

namespace {

VectorXd random_potential(const FeSpace& space, double scale, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  VectorXd a(space.n_nodes());
  for (int n = 0; n < space.n_nodes(); ++n) a[n] = space.free_index(n) >= 0 ? u(rng) : 0.0;
  return a;
}

MaterialModel model_of(IronLaw law) {
  MaterialModel m;
  m.law = law;
  m.complete();
  return m;
}

CircuitSpec circuit_for(const Mesh& mesh, DriveMode drive = DriveMode::kCurrent) {
  CircuitSpec c;
  c.n_cond = mesh.n_conductors;
  c.drive = drive;
  return c;
}

// 10 cm square with one 1 cm x 1 cm conductor.
GeometrySpec single_conductor() {
  GeometrySpec g = GeometrySpec::unit_square(0.02);
  g.width = g.height = 0.1;
  g.regions.push_back({"bar", RegionKind::kConductor, 0.04, 0.04, 0.05, 0.05, 0.0025, 0});
  g.regions.push_back({"core", RegionKind::kIron, 0.06, 0.02, 0.09, 0.08, 0.005, -1});
  return g;
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

}  // namespace

TEST_CASE("nodal space") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  int dirichlet = 0;
  for (char d : mesh.dirichlet) dirichlet += d;
  CHECK(space.n_free() == space.n_nodes() - dirichlet);
  for (int e = 0; e < space.n_elements(); ++e) {
    const auto& v = space.curls(e);
    CHECK((v[0] + v[1] + v[2]).norm() < 1e-9 * v[0].norm());
  }
  // a = y gives B = (1, 0), a = x gives B = (0, -1).
  VectorXd ay(space.n_nodes()), ax(space.n_nodes());
  for (int n = 0; n < space.n_nodes(); ++n) {
    ay[n] = mesh.nodes[static_cast<std::size_t>(n)].y();
    ax[n] = mesh.nodes[static_cast<std::size_t>(n)].x();
  }
  for (int e = 0; e < space.n_elements(); e += 37) {
    CHECK((space.flux_density(e, ay) - Vec2(1.0, 0.0)).norm() < 1e-12);
    CHECK((space.flux_density(e, ax) - Vec2(0.0, -1.0)).norm() < 1e-12);
  }
}

TEST_CASE("zero potential gives zero field vector") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  for (auto law : {IronLaw::kLinear, IronLaw::kAnhysteretic, IronLaw::kHysteretic}) {
    MaterialField field(space, model_of(law));
    const auto s = assemble_static(field, VectorXd::Zero(space.n_nodes()));
    CHECK(s.h.norm() == 0.0);
  }
}

TEST_CASE("vacuum material reduces to the scaled Laplacian") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  MaterialModel m = model_of(IronLaw::kLinear);
  m.mu_r_linear = 1.0;
  MaterialField field(space, m);
  const VectorXd a = random_potential(space, 1e-3, 1);
  const auto s = assemble_static(field, a);
  const SparseMatrix S = space.laplace_stiffness();
  const VectorXd expected = kNu0 * (S * a);
  CHECK((s.h - expected).norm() <= 1e-12 * expected.norm());
  CHECK((dense(s.jacobian) - kNu0 * dense(S)).norm() <= 1e-12 * kNu0 * dense(S).norm());
}

TEST_CASE("anhysteretic jacobian") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  MaterialField field(space, model_of(IronLaw::kAnhysteretic));
  const VectorXd a = random_potential(space, 2e-3, 2);
  const auto s = assemble_static(field, a);
  const SparseMatrix asym = SparseMatrix(s.jacobian.transpose()) - s.jacobian;
  CHECK(asym.norm() <= 1e-12 * s.jacobian.norm());

  // Directional finite difference.
  const VectorXd da = random_potential(space, 1.0, 3);
  const double eps = 1e-9;
  MaterialField probe(space, model_of(IronLaw::kAnhysteretic));
  const VectorXd hp = assemble_static(probe, a + eps * da).h;
  const VectorXd hm = assemble_static(probe, a - eps * da).h;
  const VectorXd fd = (hp - hm) / (2.0 * eps);
  const VectorXd jd = s.jacobian * da;
  CHECK((fd - jd).norm() <= 1e-5 * jd.norm());
}

TEST_CASE("circuit matrices of a single conductor") {
  const Mesh mesh = build_mesh(single_conductor());
  const FeSpace space(mesh);
  MaterialModel m = model_of(IronLaw::kAnhysteretic);
  m.dynamic = true;
  const auto c = assemble_dynamic_and_circuit(space, m, circuit_for(mesh));
  CHECK(c.cross_section[0] == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(c.conductance[0] == doctest::Approx(5800.0).epsilon(1e-12));
  CHECK(c.resistance[0] == doctest::Approx(1.0 / 5800.0).epsilon(1e-12));
  const Eigen::MatrixXd X = dense(c.X);
  CHECK(X.col(0).sum() == doctest::Approx(5.8e7 * 1e-4).epsilon(1e-12));
  // Column support is the conductor.
  for (int n = 0; n < space.n_nodes(); ++n) {
    if (X(n, 0) != 0.0) {
      const Vec2& p = mesh.nodes[static_cast<std::size_t>(n)];
      CHECK(p.x() >= 0.04 - 1e-12);
      CHECK(p.x() <= 0.05 + 1e-12);
    }
  }
  const Eigen::MatrixXd Ms = dense(c.M_sigma);
  const Eigen::MatrixXd Mh = dense(c.M_sheet);
  CHECK((Ms - Ms.transpose()).norm() == 0.0);
  CHECK((Mh - Mh.transpose()).norm() <= 1e-14 * Mh.norm());
  CHECK(Ms.sum() == doctest::Approx(5.8e7 * 1e-4).epsilon(1e-12));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ms).eigenvalues().minCoeff() >= -1e-9 * Ms.norm());
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Mh).eigenvalues().minCoeff() >= -1e-9 * Mh.norm());
  CHECK(Mh.norm() > 0.0);

  m.dynamic = false;
  CHECK(dense(assemble_dynamic_and_circuit(space, m, circuit_for(mesh)).M_sheet).norm() == 0.0);
}

TEST_CASE("zero conductivity") {
  const Mesh mesh = build_mesh(single_conductor());
  const FeSpace space(mesh);
  MaterialModel m = model_of(IronLaw::kAnhysteretic);
  m.sigma_conductor = 0.0;
  const auto c = assemble_dynamic_and_circuit(space, m, circuit_for(mesh, DriveMode::kVoltage));
  CHECK(dense(c.M_sigma).norm() == 0.0);
  CHECK(dense(c.X).norm() == 0.0);
  CHECK(dense(c.M_sheet).norm() == 0.0);
  CHECK_THROWS_AS(assemble_dynamic_and_circuit(space, m, circuit_for(mesh)), ConfigError);
}

TEST_CASE("conductor count must match the geometry") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  CircuitSpec c = circuit_for(mesh);
  c.n_cond = 3;
  CHECK_THROWS_AS(assemble_dynamic_and_circuit(space, model_of(IronLaw::kLinear), c), ConfigError);
}

TEST_CASE("hysteretic evaluation keeps the committed state until commit") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  MaterialField field(space, model_of(IronLaw::kHysteretic));
  const VectorXd a = random_potential(space, 5e-4, 4);
  field.evaluate(a);
  const int e = mesh.iron_points.front();
  const int slot = field.iron_slot(e);
  CHECK(slot == 0);
  CHECK(field.committed_state(slot) == PlayState::virgin(*field.model().play));
  CHECK(field.H_committed()[static_cast<std::size_t>(e)] == Vec2::Zero());
  const Vec2 H = field.H()[static_cast<std::size_t>(e)];
  field.commit();
  CHECK(field.H_committed()[static_cast<std::size_t>(e)] == H);
  CHECK_FALSE(field.committed_state(slot) == PlayState::virgin(*field.model().play));
  CHECK(field.material_evaluations() == static_cast<long long>(mesh.iron_points.size()));
}

TEST_CASE("saturated anhysteretic target beyond the table") {
  const Mesh mesh = build_mesh(GeometrySpec::quarter_dipole());
  const FeSpace space(mesh);
  MaterialField field(space, model_of(IronLaw::kAnhysteretic));
  VectorXd a(space.n_nodes());
  for (int n = 0; n < space.n_nodes(); ++n)
    a[n] = space.free_index(n) >= 0 ? 10.0 * mesh.nodes[static_cast<std::size_t>(n)].y() : 0.0;
  CHECK_THROWS_AS(field.evaluate(a), MaterialError);
}
