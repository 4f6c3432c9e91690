#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "hystermag/errors.hpp"
#include "hystermag/inversion.hpp"

using namespace hystermag;

namespace {

const PlayConfig& table() {
  static const PlayConfig cfg = PlayConfig::m235_35a();
  return cfg;
}

const PlayState& ascending() {
  static const PlayState s = prepare_major_branch(table(), Vec2(-1e4, 0.0), Vec2::Zero());
  return s;
}

InversionResult solve(InversionScheme scheme, double tol, double h0, int max_iter = 20) {
  InversionSettings settings;
  settings.scheme = scheme;
  settings.tol = tol;
  settings.max_iter = max_iter;
  return invert(table(), settings, ascending(), Vec2(0.7, 0.0), Vec2(h0, 0.0));
}

// Scalar play written out independently, bisected on the ascending branch.
double oracle_man(double h) {
  auto L = [](double x) { return std::abs(x) < 1e-4 ? x / 3.0 : 1.0 / std::tanh(x) - 1.0 / x; };
  const double m = 1.39 * L(std::abs(h) / 18.18) + 0.56 * L(std::abs(h) / 3910.0);
  return h < 0.0 ? -m : m;
}

double oracle_B(const std::vector<double>& hr_prev, double H) {
  const auto& w = table().weights();
  const auto& kappa = table().kappa();
  double B = kMu0 * H;
  for (std::size_t k = 0; k < w.size(); ++k)
    B += w[k] * oracle_man(std::clamp(hr_prev[k], H - kappa[k], H + kappa[k]));
  return B;
}

double oracle_h_star(double B_star) {
  const auto& kappa = table().kappa();
  // -10 kA/m then back to zero leaves every cell at -kappa_k.
  std::vector<double> hr(kappa.size());
  for (std::size_t k = 0; k < hr.size(); ++k) hr[k] = -kappa[k];
  double lo = 0.0, hi = 1e4;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (oracle_B(hr, mid) < B_star ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(parse_scheme("direct") == InversionScheme::kDirect);
  CHECK(parse_scheme("precond") == InversionScheme::kPreconditioned);
  CHECK(parse_scheme("safeguarded") == InversionScheme::kSafeguarded);
  CHECK_FALSE(parse_scheme("bogus").has_value());
  for (auto s : {InversionScheme::kDirect, InversionScheme::kNewton, InversionScheme::kPreconditioned,
                 InversionScheme::kSafeguarded})
    CHECK(parse_scheme(to_string(s)) == s);
}

TEST_CASE("settings validation") {
  InversionSettings s;
  s.tol = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = {};
  s.max_iter = 0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = {};
  s.mu_r_max = 0.5;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = {};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("inverse at 0.7 T on the ascending branch") {
  const double oracle = oracle_h_star(0.7);
  CHECK(oracle == doctest::Approx(78.68).epsilon(0.5 / 78.68));
  for (auto scheme : {InversionScheme::kDirect, InversionScheme::kPreconditioned, InversionScheme::kSafeguarded}) {
    CAPTURE(to_string(scheme));
    const auto r = solve(scheme, 1e-12, 100.0, 200);
    REQUIRE(r.converged);
    CHECK(r.H.x() == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(std::abs(r.H.y()) < 1e-12);
  }
}

TEST_CASE("iteration counts of the benchmark problem") {
  CHECK(solve(InversionScheme::kPreconditioned, 1e-3, 100.0).iterations == 4);
  CHECK(solve(InversionScheme::kDirect, 1e-9, 100.0, 100).iterations == 33);
  CHECK(solve(InversionScheme::kNewton, 1e-6, 100.0).iterations == 4);
  const auto pre = solve(InversionScheme::kPreconditioned, 1e-9, 1000.0);
  CHECK(pre.converged);
  CHECK(std::abs(pre.iterations - 14) <= 2);
}

TEST_CASE("unrelaxed newton from 1 kA/m") {
  const auto r = solve(InversionScheme::kNewton, 1e-3, 1000.0);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 20);
  // The guarded variant handles the same start.
  CHECK(solve(InversionScheme::kSafeguarded, 1e-9, 1000.0).converged);
}

TEST_CASE("exact start needs no update") {
  const Vec2 H0(63.0, -20.0);
  const Vec2 B = hysteretic_flux_density(table(), ascending(), H0);
  for (auto scheme : {InversionScheme::kDirect, InversionScheme::kNewton, InversionScheme::kPreconditioned,
                      InversionScheme::kSafeguarded}) {
    InversionSettings s;
    s.scheme = scheme;
    const auto r = invert(table(), s, ascending(), B, H0);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.H == H0);
  }
}

TEST_CASE("direct residual does not increase") {
  double last = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 40; ++n) {
    const auto r = solve(InversionScheme::kDirect, 1e-15, 1000.0, n);
    CHECK(r.rel_error <= last * (1.0 + 1e-12));
    last = r.rel_error;
  }
}

TEST_CASE("preconditioned converges from a grid of starts") {
  InversionSettings s;
  s.scheme = InversionScheme::kPreconditioned;
  s.tol = 1e-6;
  int failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const double h0 = 1e6 * k / 999.0;
    const auto r = invert(table(), s, ascending(), Vec2(0.7, 0.0), Vec2(h0, 0.0));
    failures += r.converged ? 0 : 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("committed solution reproduces the target") {
  InversionSettings s;
  s.scheme = InversionScheme::kPreconditioned;
  s.tol = 1e-9;
  const Vec2 B_star(0.7, 0.0);
  const auto r = invert(table(), s, ascending(), B_star, Vec2(100.0, 0.0));
  const PlayState committed = play_update(table(), ascending(), r.H);
  const auto ev = eval_hyst(table(), committed, r.H);
  CHECK((ev.B - B_star).norm() / B_star.norm() <= 1e-9);
  // Inversion left the state untouched.
  CHECK(ascending() == prepare_major_branch(table(), Vec2(-1e4, 0.0), Vec2::Zero()));
}

TEST_CASE("rotated problems give the same solution") {
  const auto base = solve(InversionScheme::kPreconditioned, 1e-9, 100.0);
  InversionSettings s;
  s.scheme = InversionScheme::kPreconditioned;
  s.tol = 1e-9;
  for (double theta : {0.3, 1.7, 4.0}) {
    const Eigen::Rotation2Dd rot(theta);
    const Vec2 e = rot * Vec2(1.0, 0.0);
    const PlayState prep = prepare_major_branch(table(), -1e4 * e, Vec2::Zero());
    const auto r = invert(table(), s, prep, 0.7 * e, 100.0 * e);
    CHECK(r.iterations == base.iterations);
    CHECK((r.H - rot * base.H).norm() < 1e-8);
  }
  const auto one = bench_sweep(table(), s, 1, 100.0, 0.7);
  const auto hundred = bench_sweep(table(), s, 100, 100.0, 0.7);
  CHECK(one.mean_iters == hundred.mean_iters);
  CHECK(hundred.converged_fraction == 1.0);
}

TEST_CASE("safeguarded scheme from the virgin state") {
  InversionSettings s;
  s.scheme = InversionScheme::kSafeguarded;
  s.tol = 1e-10;
  s.b_floor = 1e-3;
  const PlayState virgin = PlayState::virgin(table());
  for (double b : {1e-4, 0.05, 0.8, 1.5, 1.9}) {
    CAPTURE(b);
    const Vec2 B_star(0.6 * b, -0.8 * b);
    const auto r = invert(table(), s, virgin, B_star, Vec2::Zero());
    REQUIRE(r.converged);
    CHECK((hysteretic_flux_density(table(), virgin, r.H) - B_star).norm() <= 1e-10 * std::max(b, 1e-3));
  }
  // Beyond the anhysteretic table only the guarded scheme still works.
  const Vec2 far(3.5, 0.0);
  const auto r = invert(table(), s, virgin, far, Vec2::Zero());
  CHECK(r.converged);
  s.scheme = InversionScheme::kPreconditioned;
  CHECK_THROWS_AS(invert(table(), s, virgin, far, Vec2::Zero()), OutOfRange);
}

TEST_CASE("bench csv") {
  InversionSettings s;
  BenchReport report;
  report.n_angles = 4;
  report.B_mag_T = 0.7;
  report.rows.push_back(bench_sweep(table(), s, 4, 100.0, 0.7));
  const std::string csv = bench_csv(report);
  CHECK(csv.find("scheme,tol,h0_Apm,mean_iters,mean_time_us") != std::string::npos);
  CHECK(csv.find("preconditioned,") != std::string::npos);
}
