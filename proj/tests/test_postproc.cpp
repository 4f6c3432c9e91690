#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "hystermag/errors.hpp"
#include "hystermag/postproc.hpp"

using namespace hystermag;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec2> sampled(int n, double f, auto shape) {
  std::vector<Vec2> B(static_cast<std::size_t>(n) + 1);
  const double dt = 1.0 / (f * n);
  for (int k = 0; k <= n; ++k) B[static_cast<std::size_t>(k)] = shape(k * dt);
  return B;
}

std::vector<Probe> iron_probes() {
  return {{"A", Vec2(0.02, 0.04), true, -1},
          {"B", Vec2(0.02, 0.085), true, -1},
          {"C", Vec2(0.10, 0.085), true, -1},
          {"D", Vec2(0.10, 0.03), true, -1}};
}

// Coarse sinusoidal runs, shared by the cases below.
const SolutionArchive& run(IronLaw law, bool dynamic, int periods) {
  static std::map<std::tuple<IronLaw, bool, int>, SolutionArchive> cache;
  const auto key = std::make_tuple(law, dynamic, periods);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  TransientProblem p;
  p.geometry = GeometrySpec::quarter_dipole();
  p.geometry.refinement = 2.0;
  p.model.law = law;
  p.model.dynamic = dynamic;
  p.circuit.n_cond = p.geometry.n_conductors();
  p.circuit.source.kind = WaveformKind::kSinusoid;
  p.circuit.source.amplitude = 12.5e3;
  p.circuit.source.frequency = 500.0;
  p.dt = 1e-5;
  p.duration = periods * 2e-3;
  p.probes = iron_probes();
  return cache.emplace(key, transient_solve(p)).first->second;
}

double cycle_sum(const std::vector<double>& p, const SolutionArchive& a, int cycle) {
  const int n = steps_per_cycle(a);
  double s = 0.0;
  for (int k = cycle * n; k < (cycle + 1) * n; ++k) s += p[static_cast<std::size_t>(k)] * a.dt;
  return s;
}

}  // namespace

TEST_CASE("cycle denominators") {
  CHECK(std::abs(hysteresis_denominator() - 4.0) < 1e-12);
  CHECK(std::abs(eddy_denominator() - 2.0 * kPi * kPi) < 1e-12);
}

TEST_CASE("uniform sinusoid reduces to the closed forms") {
  const AposterioriParams params;
  const double f = 50.0;
  const int n = 200000;
  const auto B = sampled(n, f, [&](double t) { return Vec2(std::sin(2.0 * kPi * f * t), 0.0); });
  const auto d = aposteriori_density(B, 1.0 / (f * n), params);
  CHECK(d.B_hat == doctest::Approx(1.0).epsilon(1e-14));
  const double hyst = params.gamma * params.k_hyst * f;
  const double eddy = params.gamma * params.k_eddy * f * f;
  CHECK(std::abs(d.p_hyst - hyst) <= 1e-12 * hyst);
  // Backward differences shrink the mean square rate by sinc^2(pi/n).
  const double x = kPi / n;
  const double sinc2 = std::pow(std::sin(x) / x, 2);
  CHECK(std::abs(d.p_eddy - eddy * sinc2) <= 1e-9 * eddy);
  CHECK(std::abs(d.p_eddy - eddy) <= 1e-9 * eddy);

  // Scaling with amplitude and frequency.
  const auto B2 = sampled(4000, 200.0, [&](double t) { return Vec2(0.0, 1.5 * std::cos(2.0 * kPi * 200.0 * t)); });
  const auto d2 = aposteriori_density(B2, 1.0 / (200.0 * 4000), params);
  CHECK(d2.p_hyst == doctest::Approx(params.gamma * params.k_hyst * 200.0 * 2.25).epsilon(1e-12));
}

TEST_CASE("triangle wave gives the same hysteresis estimate") {
  const double f = 50.0;
  const int n = 4000;
  const auto sine = sampled(n, f, [&](double t) { return Vec2(0.8 * std::sin(2.0 * kPi * f * t), 0.0); });
  const auto tri = sampled(n, f, [&](double t) {
    const double phase = std::fmod(t * f + 0.25, 1.0);
    return Vec2(0.8 * (phase < 0.5 ? 4.0 * phase - 1.0 : 3.0 - 4.0 * phase), 0.0);
  });
  const double dt = 1.0 / (f * n);
  const auto a = aposteriori_density(sine, dt);
  const auto b = aposteriori_density(tri, dt);
  CHECK(b.B_hat == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(std::abs(a.p_hyst - b.p_hyst) <= 1e-12 * a.p_hyst);
  // Mean square rates differ: 16 for the triangle, 2 pi^2 for the sine.
  CHECK(b.p_eddy / a.p_eddy == doctest::Approx(8.0 / (kPi * kPi)).epsilon(1e-5));
}

TEST_CASE("constant field has no estimated loss") {
  const std::vector<Vec2> B(100, Vec2(0.3, -1.1));
  const auto d = aposteriori_density(B, 1e-4);
  CHECK(d.p_hyst == 0.0);
  CHECK(d.p_eddy == 0.0);
  CHECK(d.B_hat == 0.0);
}

TEST_CASE("amplitude of vector trajectories") {
  std::vector<Vec2> circle;
  for (int k = 0; k < 360; ++k) circle.emplace_back(1.2 * std::cos(k * kPi / 180.0), 1.2 * std::sin(k * kPi / 180.0));
  CHECK(half_peak_to_peak(circle) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(half_peak_to_peak({Vec2(1.0, 1.0)}) == 0.0);
  CHECK(half_peak_to_peak({Vec2(0.0, 0.0), Vec2(3.0, 4.0), Vec2(1.0, 1.0)}) == doctest::Approx(2.5));
}

TEST_CASE("loss channel pattern") {
  struct Row {
    IronLaw law;
    bool dynamic;
    bool eddy;
    bool hyst;
  };
  for (const Row& r : {Row{IronLaw::kAnhysteretic, false, false, false}, Row{IronLaw::kAnhysteretic, true, true, false},
                       Row{IronLaw::kHysteretic, false, false, true}, Row{IronLaw::kHysteretic, true, true, true}}) {
    const auto& a = run(r.law, r.dynamic, 1);
    const auto e = channel_energy(a, 0.0, a.period);
    CAPTURE(static_cast<int>(r.law));
    CAPTURE(r.dynamic);
    CHECK((e.eddy > 0.0) == r.eddy);
    CHECK((e.hyst > 0.0) == r.hyst);
    if (!r.eddy) CHECK(e.eddy == 0.0);
    if (!r.hyst) CHECK(e.hyst == 0.0);
    const auto losses = loss_series(a);
    for (double p : losses.p_eddy) CHECK(p >= 0.0);
    for (double p : losses.p_hyst) CHECK(p >= -1e-12);
  }
}

TEST_CASE("resistive loss in two forms and across models") {
  const auto& ref = run(IronLaw::kHysteretic, true, 1);
  const auto r = resistive_loss(ref);
  const double field = cycle_sum(r.p_field, ref, 0);
  const double terminal = cycle_sum(r.p_terminal, ref, 0);
  CHECK(std::abs(field - terminal) <= 1e-3 * field);
  for (auto law : {IronLaw::kAnhysteretic, IronLaw::kHysteretic}) {
    const auto& a = run(law, false, 1);
    const double other = cycle_sum(resistive_loss(a).p_field, a, 0);
    CHECK(std::abs(other - field) <= 5e-3 * field);
  }
}

TEST_CASE("hysteresis loss settles after the first cycle") {
  const auto& a = run(IronLaw::kHysteretic, true, 3);
  const auto rows = energy_balance(a);
  REQUIRE(rows.size() == 3);
  MESSAGE("hyst per cycle " << rows[0].energy.hyst << " " << rows[1].energy.hyst << " " << rows[2].energy.hyst);
  CHECK(std::abs(rows[1].energy.hyst - rows[2].energy.hyst) <= 0.01 * rows[2].energy.hyst);
  for (const auto& row : rows) CHECK(row.relative_defect < 1e-6);
}

TEST_CASE("a-posteriori losses of an archive") {
  const auto& a = run(IronLaw::kHysteretic, true, 3);
  const auto est = aposteriori_losses(a);
  CHECK(est.cycle == 2);
  CHECK(est.warning.empty());
  CHECK(est.period == doctest::Approx(2e-3));
  CHECK(est.p_hyst > 0.0);
  CHECK(est.p_eddy > 0.0);
  CHECK(est.e_hyst == doctest::Approx(est.p_hyst * 2e-3));
  CHECK_THROWS_AS(aposteriori_losses(a, {}, 3), InvalidInput);
  CHECK(aposteriori_losses(a, {}, 1).cycle == 1);

  SolutionArchive bare = a;
  bare.potentials.clear();
  CHECK_THROWS_AS(aposteriori_losses(bare), InvalidInput);
  SolutionArchive aperiodic = a;
  aperiodic.period = 0.0;
  CHECK_FALSE(aposteriori_losses(aperiodic).warning.empty());
}

TEST_CASE("dipole probe") {
  const auto& ref = run(IronLaw::kHysteretic, true, 1);
  const auto& anh = run(IronLaw::kAnhysteretic, false, 1);
  const auto d = probe_dipole(ref, Vec2::Zero());
  CHECK(d.By.front() == 0.0);
  CHECK(d.By.size() == ref.times.size());
  const auto rel = relative_difference(probe_dipole(anh, Vec2::Zero()), d);
  double worst = 0.0;
  for (double v : rel) worst = std::max(worst, v);
  MESSAGE("max relative dipole difference " << worst);
  CHECK(worst < 1e-2);
  CHECK_THROWS_AS(probe_dipole(ref, Vec2(-1.0, 0.0)), InvalidInput);
  DipoleSeries shorter = d;
  shorter.By.pop_back();
  CHECK_THROWS_AS(relative_difference(shorter, d), InvalidInput);
}

TEST_CASE("BH loci") {
  const auto& anh = run(IronLaw::kAnhysteretic, false, 1);
  const auto& stat = run(IronLaw::kHysteretic, false, 1);
  const auto& dyn = run(IronLaw::kHysteretic, true, 1);
  CHECK_THROWS_AS(probe_bh(stat, "Z"), InvalidInput);
  for (const auto& p : iron_probes()) {
    CAPTURE(p.label);
    const auto lin = probe_bh(anh, p.label);
    REQUIRE(lin.B.size() == anh.steps.size() + 1);
    CHECK(lin.B.front() == Vec2::Zero());
    // Single-valued curve: closed-cycle area vanishes up to the sampling error.
    double scale = 0.0;
    for (std::size_t n = 1; n < lin.B.size(); ++n) scale += lin.H[n].norm() * (lin.B[n] - lin.B[n - 1]).norm();
    CHECK(std::abs(loop_area(lin, 0, lin.B.size() - 1)) < 1e-3 * scale);

    const auto s = probe_bh(stat, p.label);
    const auto d = probe_bh(dyn, p.label);
    const double as = loop_area(s, 0, s.B.size() - 1);
    const double ad = loop_area(d, 0, d.B.size() - 1);
    CHECK(as > 0.0);
    CHECK(ad > as);
  }
  CHECK_THROWS_AS(loop_area(probe_bh(stat, "A"), 5, 2), InvalidInput);
}

TEST_CASE("zero drive is trivially balanced") {
  TransientProblem p;
  p.geometry = GeometrySpec::quarter_dipole();
  p.geometry.refinement = 2.0;
  p.circuit.n_cond = 2;
  p.dt = 1e-5;
  p.duration = 5e-5;
  const auto a = transient_solve(p);
  const auto rows = energy_balance(a);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].defect == 0.0);
  CHECK(rows[0].relative_defect == 0.0);
  for (double v : resistive_loss(a).p_field) CHECK(v == 0.0);
}

TEST_CASE("csv outputs") {
  const auto& a = run(IronLaw::kHysteretic, true, 1);
  std::ostringstream losses, dipole, bh, balance;
  write_losses_csv(loss_series(a), losses, "meta");
  const auto d = probe_dipole(a, Vec2::Zero());
  write_dipole_csv(d, &d, dipole);
  write_bh_csv(probe_bh(a, "A"), bh);
  write_balance_csv(energy_balance(a), balance);
  auto lines = [](const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); };
  CHECK(losses.str().find("t,p_res,p_eddy,p_hyst,w_mag") != std::string::npos);
  CHECK(lines(losses.str()) == a.steps.size() + 2);
  CHECK(dipole.str().rfind("t,By,By_reference,relative_difference", 0) == 0);
  CHECK(lines(dipole.str()) == a.times.size() + 1);
  CHECK(bh.str().rfind("t,Bx,By,Hx,Hy,dissipation", 0) == 0);
  CHECK(lines(balance.str()) == 2);
}
