#include <doctest.h>

#include <cmath>

#include "hystermag/errors.hpp"
#include "hystermag/postproc.hpp"
#include "hystermag/transient.hpp"

using namespace hystermag;

namespace {

TransientProblem sinusoid_problem(IronLaw law, bool dynamic, double refinement, double dt, double duration) {
  TransientProblem p;
  p.geometry = GeometrySpec::quarter_dipole();
  p.geometry.refinement = refinement;
  p.model.law = law;
  p.model.dynamic = dynamic;
  p.circuit.n_cond = p.geometry.n_conductors();
  p.circuit.source.kind = WaveformKind::kSinusoid;
  p.circuit.source.amplitude = 12.5e3;
  p.circuit.source.frequency = 500.0;
  p.dt = dt;
  p.duration = duration;
  return p;
}

double final_dipole(const SolutionArchive& a) { return probe_dipole(a, Vec2::Zero()).By.back(); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("settings validation") {
  SolverSettings s;
  CHECK_NOTHROW(s.validate());
  s.threads = 0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = {};
  s.max_newton = 0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = {};
  s.newton_rtol = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);

  auto p = sinusoid_problem(IronLaw::kLinear, false, 2.0, 1e-5, 1.5e-5);
  CHECK_THROWS_AS(transient_solve(p), InvalidInput);
  p.duration = 2e-5;
  p.dt = 0.0;
  CHECK_THROWS_AS(transient_solve(p), InvalidInput);
}

TEST_CASE("zero drive stays at zero") {
  auto p = sinusoid_problem(IronLaw::kHysteretic, true, 2.0, 1e-5, 1e-4);
  p.circuit.source = Waveform{};
  const auto a = transient_solve(p);
  REQUIRE(a.steps.size() == 10);
  for (const auto& s : a.steps) {
    CHECK(s.newton_iters == 1);
    CHECK(s.energy.input == 0.0);
  }
  for (const auto& x : a.potentials) CHECK(x.norm() == 0.0);
}

TEST_CASE("linear material converges in one update") {
  auto p = sinusoid_problem(IronLaw::kLinear, true, 2.0, 1e-5, 2e-4);
  const auto a = transient_solve(p);
  for (const auto& s : a.steps) CHECK(s.newton_iters == 1);
  CHECK(std::abs(final_dipole(a)) > 0.01);
}

TEST_CASE("archive of the three-period run") {
  auto p = sinusoid_problem(IronLaw::kAnhysteretic, false, 2.0, 1e-5, 6e-3);
  const auto a = transient_solve(p);
  CHECK(a.steps.size() == 600);
  CHECK(a.times.size() == 601);
  CHECK(a.potentials.size() == 601);
  CHECK(a.times.back() == doctest::Approx(6e-3).epsilon(1e-12));
  CHECK(a.period == doctest::Approx(2e-3));
  CHECK(steps_per_cycle(a) == 200);
  CHECK(full_cycles(a) == 3);
  const auto& mesh = *a.mesh;
  for (const auto& x : a.potentials)
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
      if (mesh.dirichlet[n]) REQUIRE(x[static_cast<Eigen::Index>(n)] == 0.0);
  double worst = 0.0;
  for (const auto& s : a.steps) {
    const auto& e = s.energy;
    const double scale = std::abs(e.input) + std::abs(e.storage) + e.resistive + e.eddy + e.hyst;
    worst = std::max(worst, std::abs(e.closure_defect()) / scale);
  }
  MESSAGE("worst per-step closure " << worst);
  CHECK(worst < 1e-4);
  for (const auto& row : energy_balance(a)) CHECK(row.relative_defect < 1e-6);
}

TEST_CASE("implicit Euler is first order") {
  // Quarter period, dipole field at the current peak.
  double B[3];
  const double dts[3] = {2e-5, 1e-5, 5e-6};
  for (int k = 0; k < 3; ++k) B[k] = final_dipole(transient_solve(sinusoid_problem(IronLaw::kAnhysteretic, true, 2.0, dts[k], 5e-4)));
  const double ratio = std::abs(B[0] - B[1]) / std::abs(B[1] - B[2]);
  MESSAGE("Richardson ratio " << ratio);
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
}

TEST_CASE("numerical dissipation halves with the step") {
  double nd[2];
  const double dts[2] = {2e-5, 1e-5};
  for (int k = 0; k < 2; ++k) {
    const auto a = transient_solve(sinusoid_problem(IronLaw::kHysteretic, true, 2.0, dts[k], 2e-3));
    const auto rows = energy_balance(a);
    REQUIRE(rows.size() == 1);
    nd[k] = rows[0].numerical_dissipation;
    CHECK(rows[0].relative_defect < 1e-6);
  }
  MESSAGE("numerical dissipation " << nd[0] << " " << nd[1]);
  CHECK(nd[0] / nd[1] > 1.7);
  CHECK(nd[0] / nd[1] < 2.3);
}

TEST_CASE("voltage drive reproduces the currents") {
  auto p = sinusoid_problem(IronLaw::kHysteretic, true, 2.0, 1e-5, 1e-3);
  const auto cur = transient_solve(p);
  std::vector<double> t;
  std::vector<std::vector<double>> u(static_cast<std::size_t>(p.circuit.n_cond));
  for (const auto& s : cur.steps) {
    t.push_back(s.t);
    for (std::size_t m = 0; m < u.size(); ++m) u[m].push_back(s.u[m]);
  }
  TransientProblem vp = p;
  vp.circuit.drive = DriveMode::kVoltage;
  vp.circuit.source = Waveform{};
  for (auto& um : u) vp.circuit.per_conductor.push_back(tabulated(t, um));
  const auto vol = transient_solve(vp);
  REQUIRE(vol.steps.size() == cur.steps.size());
  double worst = 0.0;
  for (std::size_t n = 0; n < cur.steps.size(); ++n)
    for (std::size_t m = 0; m < u.size(); ++m)
      worst = std::max(worst, std::abs(vol.steps[n].i[m] - cur.steps[n].i[m]));
  MESSAGE("worst current difference " << worst << " A");
  CHECK(worst <= 1e-3 * 12.5e3);
}

TEST_CASE("mesh refinement changes the dipole field little") {
  double B[2];
  const double refinement[2] = {1.0, 0.5};
  for (int k = 0; k < 2; ++k)
    B[k] = final_dipole(transient_solve(sinusoid_problem(IronLaw::kAnhysteretic, false, refinement[k], 1e-5, 5e-4)));
  MESSAGE("dipole " << B[0] << " " << B[1]);
  CHECK(std::abs(B[0] - B[1]) < 0.01 * std::abs(B[1]));
}

TEST_CASE("threads do not change the result") {
  auto p = sinusoid_problem(IronLaw::kHysteretic, true, 2.0, 1e-5, 3e-4);
  const auto one = transient_solve(p);
  p.solver.threads = 2;
  const auto two = transient_solve(p);
  CHECK((one.potentials.back() - two.potentials.back()).norm() == 0.0);
  const auto again = transient_solve(p);
  CHECK((again.potentials.back() - two.potentials.back()).norm() == 0.0);
}

TEST_CASE("probes") {
  auto p = sinusoid_problem(IronLaw::kHysteretic, false, 2.0, 1e-5, 1e-4);
  p.probes = {{"gap", Vec2(0.0, 0.0), false, -1}, {"A", Vec2(0.02, 0.04), true, -1}};
  const auto a = transient_solve(p);
  REQUIRE(a.steps.back().probes.size() == 2);
  CHECK(a.steps.back().probes[1].B.norm() > 0.0);
  CHECK(a.steps.back().probes[1].dissipation >= 0.0);

  auto outside = p;
  outside.probes = {{"far", Vec2(1.0, 1.0), false, -1}};
  CHECK_THROWS_AS(transient_solve(outside), InvalidInput);
  auto not_iron = p;
  not_iron.probes = {{"air", Vec2(0.0, 0.0), true, -1}};
  CHECK_THROWS_AS(transient_solve(not_iron), InvalidInput);
}

TEST_CASE("fixed Newton mode") {
  auto p = sinusoid_problem(IronLaw::kHysteretic, false, 2.0, 1e-5, 5e-5);
  p.solver.fixed_newton = 5;
  const auto a = transient_solve(p);
  for (const auto& s : a.steps) CHECK(s.newton_iters == 5);
  const auto n_iron = static_cast<long long>(a.mesh->iron_points.size());
  CHECK(a.material_evaluations == 5LL * 6LL * n_iron);
}

TEST_CASE("DC current reaches the ohmic limit") {
  auto p = sinusoid_problem(IronLaw::kLinear, false, 2.0, 1e-4, 0.2);
  p.circuit.source = tabulated({0.0}, {100.0});
  const auto a = transient_solve(p);
  const auto res = resistive_loss(a, ReportScale{1.0});
  const FeSpace space(*a.mesh);
  const auto c = assemble_dynamic_and_circuit(space, a.model, p.circuit);
  double P = 0.0;
  for (Eigen::Index m = 0; m < c.conductance.size(); ++m) P += 100.0 * 100.0 / c.conductance[m];
  MESSAGE("p_field " << res.p_field.back() << " p_terminal " << res.p_terminal.back() << " I2/G " << P);
  CHECK(res.p_field.back() == doctest::Approx(P).epsilon(1e-3));
  CHECK(res.p_terminal.back() == doctest::Approx(P).epsilon(1e-3));
  CHECK(max_abs(res.p_field) < 1e3 * P);
}
