#include "hystermag/postproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hystermag/csv.hpp"
#include "hystermag/errors.hpp"

namespace hystermag {

namespace {

constexpr double kPi = std::numbers::pi;

double source_value(const SolutionArchive& archive, std::size_t step) {
  const auto& rec = archive.steps[step];
  const auto& v = archive.drive == DriveMode::kCurrent ? rec.i : rec.u;
  return v.empty() ? 0.0 : v.front();
}

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x[static_cast<std::size_t>(i)] = x;
    rule.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// (1/2pi) int_0^2pi f(t) dt, split where |cos| has kinks.
template <typename F>
double cycle_mean(F f) {
  static const GaussRule rule = gauss_legendre(24);
  const std::array<double, 4> breaks{0.0, 0.5 * kPi, 1.5 * kPi, 2.0 * kPi};
  double sum = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    const double half = 0.5 * (breaks[s + 1] - breaks[s]);
    for (std::size_t k = 0; k < rule.x.size(); ++k) sum += half * rule.w[k] * f(mid + half * rule.x[k]);
  }
  return sum / (2.0 * kPi);
}

}  // namespace

double hysteresis_denominator() {
  return cycle_mean([](double t) { return std::abs(2.0 * kPi * std::cos(t)); });
}

double eddy_denominator() {
  return cycle_mean([](double t) {
    const double v = 2.0 * kPi * std::cos(t);
    return v * v;
  });
}

ResistiveSeries resistive_loss(const SolutionArchive& archive, ReportScale scale) {
  ResistiveSeries out;
  out.p_field.reserve(archive.steps.size());
  out.p_terminal.reserve(archive.steps.size());
  for (const auto& s : archive.steps) {
    out.p_field.push_back(scale.symmetry * s.energy.resistive / archive.dt);
    out.p_terminal.push_back(scale.symmetry * s.energy.resistive_terminal() / archive.dt);
  }
  return out;
}

LossSeries loss_series(const SolutionArchive& archive, ReportScale scale) {
  LossSeries out;
  const double k = scale.symmetry / archive.dt;
  double w = 0.0;
  for (const auto& s : archive.steps) {
    w += scale.symmetry * s.energy.storage_state;
    out.t.push_back(s.t);
    out.p_input.push_back(k * s.energy.input);
    out.p_res.push_back(k * s.energy.resistive);
    out.p_eddy.push_back(k * s.energy.eddy);
    out.p_hyst.push_back(k * s.energy.hyst);
    out.w_mag.push_back(w);
  }
  return out;
}

ChannelEnergy channel_energy(const SolutionArchive& archive, double t0, double t1, ReportScale scale) {
  ChannelEnergy out;
  const double eps = 1e-9 * archive.dt;
  for (const auto& s : archive.steps) {
    if (s.t <= t0 + eps || s.t > t1 + eps) continue;
    out.input += s.energy.input;
    out.resistive += s.energy.resistive;
    out.eddy += s.energy.eddy;
    out.hyst += s.energy.hyst;
    out.storage += s.energy.storage;
    out.storage_state += s.energy.storage_state;
  }
  for (double* v : {&out.input, &out.resistive, &out.eddy, &out.hyst, &out.storage, &out.storage_state}) {
    *v *= scale.symmetry;
  }
  return out;
}

int steps_per_cycle(const SolutionArchive& archive) {
  if (!(archive.period > 0.0)) return 0;
  return static_cast<int>(std::llround(archive.period / archive.dt));
}

int full_cycles(const SolutionArchive& archive) {
  const int n = steps_per_cycle(archive);
  return n > 0 ? static_cast<int>(archive.steps.size()) / n : 0;
}

double half_peak_to_peak(const std::vector<Vec2>& B) {
  // The farthest pair lies on the convex hull (monotone chain).
  std::vector<Vec2> pts(B);
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Vec2> hull;
  if (pts.size() <= 2) {
    hull = pts;
  } else {
    hull.resize(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
      while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) d2 = std::max(d2, (hull[i] - hull[j]).squaredNorm());
  return 0.5 * std::sqrt(d2);
}

AposterioriDensity aposteriori_density(const std::vector<Vec2>& B, double dt, const AposterioriParams& params) {
  AposterioriDensity out;
  if (B.size() < 2) return out;
  if (!(dt > 0.0)) throw InvalidInput("aposteriori: dt must be positive");
  const double T = dt * static_cast<double>(B.size() - 1);
  out.B_hat = half_peak_to_peak(B);
  double rate_abs = 0.0, rate_sq = 0.0;
  for (std::size_t n = 1; n < B.size(); ++n) {
    const double r = (B[n] - B[n - 1]).norm() / dt;
    rate_abs += r * dt;
    rate_sq += r * r * dt;
  }
  out.p_hyst = params.gamma * params.k_hyst * out.B_hat * rate_abs / T / hysteresis_denominator();
  out.p_eddy = params.gamma * params.k_eddy * rate_sq / T / eddy_denominator();
  return out;
}

AposterioriLosses aposteriori_losses(const SolutionArchive& archive, const AposterioriParams& params, int cycle,
                                     ReportScale scale) {
  if (archive.potentials.size() != archive.times.size()) {
    throw InvalidInput("aposteriori: archive was recorded without potentials");
  }
  AposterioriLosses out;
  std::size_t first = 0, last = archive.steps.size();
  const int n_cycle = steps_per_cycle(archive);
  const int cycles = full_cycles(archive);
  if (n_cycle > 0 && cycles > 0) {
    out.cycle = cycle < 0 ? cycles - 1 : cycle;
    if (out.cycle >= cycles) throw InvalidInput("aposteriori: cycle index beyond the archive");
    first = static_cast<std::size_t>(out.cycle) * static_cast<std::size_t>(n_cycle);
    last = first + static_cast<std::size_t>(n_cycle);
  } else {
    out.warning = "source is not periodic or shorter than one period; using the whole run";
  }
  out.period = archive.dt * static_cast<double>(last - first);
  if (last == first) return out;

  const FeSpace space(*archive.mesh);
  std::vector<Vec2> B(last - first + 1);
  for (int e = 0; e < space.n_elements(); ++e) {
    if (archive.mesh->triangles[static_cast<std::size_t>(e)].region != RegionKind::kIron) continue;
    for (std::size_t n = first; n <= last; ++n) B[n - first] = space.flux_density(e, archive.potentials[n]);
    const AposterioriDensity d = aposteriori_density(B, archive.dt, params);
    out.p_hyst += space.area(e) * d.p_hyst;
    out.p_eddy += space.area(e) * d.p_eddy;
  }
  out.p_hyst *= scale.symmetry;
  out.p_eddy *= scale.symmetry;
  out.e_hyst = out.p_hyst * out.period;
  out.e_eddy = out.p_eddy * out.period;
  return out;
}

DipoleSeries probe_dipole(const SolutionArchive& archive, const Vec2& point) {
  const int e = archive.mesh->locate(point);
  if (e < 0) throw InvalidInput("dipole probe lies outside the mesh");
  if (archive.potentials.size() != archive.times.size()) {
    throw InvalidInput("dipole probe: archive was recorded without potentials");
  }
  const FeSpace space(*archive.mesh);
  DipoleSeries out;
  out.t = archive.times;
  out.By.reserve(archive.times.size());
  for (const auto& a : archive.potentials) out.By.push_back(space.flux_density(e, a).y());
  return out;
}

std::vector<double> relative_difference(const DipoleSeries& run, const DipoleSeries& reference) {
  if (run.By.size() != reference.By.size()) throw InvalidInput("relative difference: series lengths differ");
  double peak = 0.0;
  for (double v : reference.By) peak = std::max(peak, std::abs(v));
  std::vector<double> out(run.By.size(), 0.0);
  if (peak == 0.0) return out;
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = std::abs(run.By[n] - reference.By[n]) / peak;
  return out;
}

namespace {

std::size_t probe_index(const SolutionArchive& archive, std::string_view label) {
  for (std::size_t k = 0; k < archive.probes.size(); ++k) {
    if (archive.probes[k].label == label) return k;
  }
  throw InvalidInput("no probe named '" + std::string(label) + "'");
}

}  // namespace

BhLocus probe_bh(const SolutionArchive& archive, std::string_view label) {
  const std::size_t k = probe_index(archive, label);
  if (!archive.probes[k].iron) throw InvalidInput("probe '" + std::string(label) + "' is not an iron probe");
  BhLocus out;
  out.t.push_back(0.0);
  out.B.push_back(Vec2::Zero());
  out.H.push_back(Vec2::Zero());
  out.dissipation.push_back(0.0);
  for (const auto& s : archive.steps) {
    out.t.push_back(s.t);
    out.B.push_back(s.probes[k].B);
    out.H.push_back(s.probes[k].H);
    out.dissipation.push_back(s.probes[k].dissipation);
  }
  return out;
}

double loop_area(const BhLocus& locus, std::size_t first, std::size_t last) {
  if (last >= locus.B.size() || first > last) throw InvalidInput("loop area: invalid sample range");
  double area = 0.0;
  for (std::size_t n = first + 1; n <= last; ++n) {
    area += 0.5 * (locus.H[n] + locus.H[n - 1]).dot(locus.B[n] - locus.B[n - 1]);
  }
  return area;
}

BranchDissipation branch_dissipation(const SolutionArchive& archive, std::string_view label,
                                     std::size_t first_step, std::size_t last_step) {
  const std::size_t k = probe_index(archive, label);
  if (last_step > archive.steps.size() || first_step > last_step) {
    throw InvalidInput("branch dissipation: invalid step range");
  }
  BranchDissipation out;
  for (std::size_t n = first_step; n < last_step; ++n) {
    const double prev = n == 0 ? 0.0 : source_value(archive, n - 1);
    const double slope = source_value(archive, n) - prev;
    const double d = archive.steps[n].probes[k].dissipation;
    if (slope > 0.0) out.rising += d;
    if (slope < 0.0) out.falling += d;
  }
  return out;
}

std::vector<CycleBalance> energy_balance(const SolutionArchive& archive, ReportScale scale) {
  std::vector<CycleBalance> rows;
  const int n_cycle = steps_per_cycle(archive);
  const int cycles = full_cycles(archive);
  auto make_row = [&](int index, double t0, double t1) {
    CycleBalance row;
    row.cycle = index;
    row.t0 = t0;
    row.t1 = t1;
    row.energy = channel_energy(archive, t0, t1, scale);
    const auto& e = row.energy;
    row.defect = e.input - (e.storage + e.resistive + e.eddy + e.hyst);
    row.relative_defect = e.input != 0.0 ? std::abs(row.defect) / std::abs(e.input) : 0.0;
    row.numerical_dissipation = e.storage - e.storage_state;
    return row;
  };
  if (n_cycle > 0 && cycles > 0) {
    for (int c = 0; c < cycles; ++c) {
      rows.push_back(make_row(c, c * archive.period, (c + 1) * archive.period));
    }
  } else if (!archive.steps.empty()) {
    rows.push_back(make_row(0, 0.0, archive.steps.back().t));
  }
  return rows;
}

void write_losses_csv(const LossSeries& losses, std::ostream& out, std::string_view metadata) {
  CsvWriter csv(out, metadata);
  csv.header({"t", "p_res", "p_eddy", "p_hyst", "w_mag", "p_input"});
  for (std::size_t n = 0; n < losses.t.size(); ++n) {
    csv.row(losses.t[n], losses.p_res[n], losses.p_eddy[n], losses.p_hyst[n], losses.w_mag[n], losses.p_input[n]);
  }
}

void write_dipole_csv(const DipoleSeries& series, const DipoleSeries* reference, std::ostream& out,
                      std::string_view metadata) {
  CsvWriter csv(out, metadata);
  if (reference == nullptr) {
    csv.header({"t", "By"});
    for (std::size_t n = 0; n < series.t.size(); ++n) csv.row(series.t[n], series.By[n]);
    return;
  }
  const auto rel = relative_difference(series, *reference);
  csv.header({"t", "By", "By_reference", "relative_difference"});
  for (std::size_t n = 0; n < series.t.size(); ++n) csv.row(series.t[n], series.By[n], reference->By[n], rel[n]);
}

void write_bh_csv(const BhLocus& locus, std::ostream& out, std::string_view metadata) {
  CsvWriter csv(out, metadata);
  csv.header({"t", "Bx", "By", "Hx", "Hy", "dissipation"});
  for (std::size_t n = 0; n < locus.t.size(); ++n) {
    csv.row(locus.t[n], locus.B[n].x(), locus.B[n].y(), locus.H[n].x(), locus.H[n].y(), locus.dissipation[n]);
  }
}

void write_balance_csv(const std::vector<CycleBalance>& rows, std::ostream& out, std::string_view metadata) {
  CsvWriter csv(out, metadata);
  csv.header({"cycle", "t0", "t1", "input", "dw_mag", "dw_mag_state", "resistive", "eddy", "hyst", "defect",
              "relative_defect", "numerical_dissipation"});
  for (const auto& r : rows) {
    const auto& e = r.energy;
    csv.row(r.cycle, r.t0, r.t1, e.input, e.storage, e.storage_state, e.resistive, e.eddy, e.hyst, r.defect,
            r.relative_defect, r.numerical_dissipation);
  }
}

}  // namespace hystermag
