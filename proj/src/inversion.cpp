#include "hystermag/inversion.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hystermag/csv.hpp"
#include "hystermag/errors.hpp"
#include "hystermag/parallel.hpp"

namespace hystermag {

std::string_view to_string(InversionScheme scheme) {
  switch (scheme) {
    case InversionScheme::kDirect: return "direct";
    case InversionScheme::kNewton: return "newton";
    case InversionScheme::kPreconditioned: return "preconditioned";
    case InversionScheme::kSafeguarded: return "safeguarded";
  }
  return "unknown";
}

std::optional<InversionScheme> parse_scheme(std::string_view name) {
  if (name == "direct") return InversionScheme::kDirect;
  if (name == "newton") return InversionScheme::kNewton;
  if (name == "preconditioned" || name == "precond") return InversionScheme::kPreconditioned;
  if (name == "safeguarded") return InversionScheme::kSafeguarded;
  return std::nullopt;
}

void InversionSettings::validate() const {
  if (!(tol > 0.0)) throw InvalidInput("inversion: tol must be positive");
  if (max_iter < 1) throw InvalidInput("inversion: max_iter must be >= 1");
  if (mu_r_max > 0.0 && mu_r_max < 1.0) throw InvalidInput("inversion: mu_r_max must be >= 1");
  if (b_floor < 0.0) throw InvalidInput("inversion: b_floor must be non-negative");
}

InversionResult invert(const PlayConfig& cfg, const InversionSettings& settings,
                       const PlayState& prev, const Vec2& B_star, const Vec2& H0) {
  settings.validate();
  if (!B_star.allFinite() || !H0.allFinite()) throw InvalidInput("inversion: non-finite input");
  const auto& curve = cfg.curve();
  const double scale = [&] {
    const double s = std::max(B_star.norm(), settings.b_floor);
    return s > 0.0 ? s : 1.0;
  }();
  const double mu_max =
      kMu0 * (settings.mu_r_max > 0.0 ? settings.mu_r_max : 1.0 + curve.chi_max());

  // Beyond the anhysteretic table the safeguarded scheme drops its fallback
  // to the direct update.
  Vec2 H_target_an = Vec2::Zero();
  bool have_target = false;
  if (settings.scheme == InversionScheme::kPreconditioned) {
    H_target_an = curve.invert(B_star);
    have_target = true;
  } else if (settings.scheme == InversionScheme::kSafeguarded && B_star.norm() < curve.max_invertible_B()) {
    H_target_an = curve.invert(B_star);
    have_target = true;
  }

  InversionResult best{H0, 0, false, std::numeric_limits<double>::infinity()};
  Vec2 H = H0;
  int n = 0;
  for (; n <= settings.max_iter; ++n) {
    Vec2 B;
    Mat2 dBdH;
    if (settings.scheme == InversionScheme::kNewton || settings.scheme == InversionScheme::kSafeguarded) {
      const HystEval ev = eval_hyst(cfg, prev, H);
      B = ev.B;
      dBdH = ev.dBdH;
    } else {
      B = hysteretic_flux_density(cfg, prev, H);
    }
    const Vec2 g = B - B_star;
    const double err = g.norm() / scale;
    if (!std::isfinite(err)) break;
    if (err < best.rel_error) best = {H, n, false, err};
    if (err <= settings.tol) return {H, n, true, err};
    if (n == settings.max_iter) break;

    Vec2 step;
    switch (settings.scheme) {
      case InversionScheme::kDirect:
        step = g / mu_max;
        break;
      case InversionScheme::kNewton: {
        const double det = dBdH.determinant();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
          best.iterations = n;
          return best;
        }
        step = dBdH.inverse() * g;
        break;
      }
      case InversionScheme::kPreconditioned:
        try {
          step = curve.invert(B) - H_target_an;
        } catch (const OutOfRange&) {
          best.iterations = n;
          return best;
        }
        break;
      case InversionScheme::kSafeguarded: {
        bool accepted = false;
        const double det = dBdH.determinant();
        if (std::abs(det) > 0.0 && std::isfinite(det)) {
          const Vec2 newton = dBdH.inverse() * g;
          double t = 1.0;
          for (int k = 0; k < 6 && !accepted; ++k, t *= 0.5) {
            const Vec2 trial = H - t * newton;
            if ((hysteretic_flux_density(cfg, prev, trial) - B_star).norm() < g.norm()) {
              step = t * newton;
              accepted = true;
            }
          }
        }
        if (!accepted) {
          if (have_target && B.norm() < curve.max_invertible_B()) {
            step = curve.invert(B) - H_target_an;
          } else {
            step = g / mu_max;
          }
        }
        break;
      }
    }
    H -= step;
    if (!H.allFinite()) break;
  }
  best.iterations = std::min(n, settings.max_iter);
  return best;
}

namespace {

struct BenchProblem {
  PlayState state;
  Vec2 B_star;
  Vec2 H0;
};

std::vector<BenchProblem> make_problems(const PlayConfig& cfg, int n_angles, double h0,
                                        double B_mag, double H_prep) {
  if (n_angles < 1) throw InvalidInput("bench: n_angles must be >= 1");
  std::vector<BenchProblem> problems;
  problems.reserve(static_cast<std::size_t>(n_angles));
  for (int i = 0; i < n_angles; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n_angles;
    const Vec2 e(std::cos(theta), std::sin(theta));
    problems.push_back({prepare_major_branch(cfg, -H_prep * e, Vec2::Zero()), B_mag * e, h0 * e});
  }
  return problems;
}

}  // namespace

SchemeBench bench_sweep(const PlayConfig& cfg, const InversionSettings& settings, int n_angles,
                        double h0_Apm, double B_mag_T, double H_prep_Apm) {
  const auto problems = make_problems(cfg, n_angles, h0_Apm, B_mag_T, H_prep_Apm);
  long long iterations = 0;
  int converged = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& p : problems) {
    const InversionResult r = invert(cfg, settings, p.state, p.B_star, p.H0);
    iterations += r.iterations;
    converged += r.converged ? 1 : 0;
  }
  const double elapsed_us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
  return {settings.scheme,
          settings.tol,
          h0_Apm,
          static_cast<double>(iterations) / n_angles,
          elapsed_us / n_angles,
          static_cast<double>(converged) / n_angles};
}

SchemeBench bench_sweep_parallel(const PlayConfig& cfg, const InversionSettings& settings,
                                 int n_angles, double h0_Apm, double B_mag_T, int threads,
                                 double H_prep_Apm) {
  const auto problems = make_problems(cfg, n_angles, h0_Apm, B_mag_T, H_prep_Apm);
  std::vector<InversionResult> results(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    results[i] = invert(cfg, settings, problems[i].state, problems[i].B_star, problems[i].H0);
  });
  long long iterations = 0;
  int converged = 0;
  for (const auto& r : results) {
    iterations += r.iterations;
    converged += r.converged ? 1 : 0;
  }
  return {settings.scheme,   settings.tol, h0_Apm, static_cast<double>(iterations) / n_angles,
          -1.0, static_cast<double>(converged) / n_angles};
}

std::string bench_csv(const BenchReport& report, std::string_view metadata) {
  std::ostringstream out;
  CsvWriter csv(out, metadata);
  csv.header({"scheme", "tol", "h0_Apm", "mean_iters", "mean_time_us", "converged_fraction"});
  for (const auto& row : report.rows) {
    csv.row(to_string(row.scheme), row.tol, row.h0_Apm, row.mean_iters, row.mean_time_us,
            row.converged_fraction);
  }
  return out.str();
}

}  // namespace hystermag
