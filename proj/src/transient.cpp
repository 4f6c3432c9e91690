#include "hystermag/transient.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hystermag/errors.hpp"

namespace hystermag {

namespace {
constexpr int kMaxBacktracks = 6;
}  // namespace

void SolverSettings::validate() const {
  if (!(newton_rtol > 0.0) || newton_atol < 0.0) throw InvalidInput("solver: invalid Newton tolerances");
  if (max_newton < 1) throw InvalidInput("solver: max_newton must be >= 1");
  if (fixed_newton < 0) throw InvalidInput("solver: fixed_newton must be >= 0");
  if (max_halvings < 0) throw InvalidInput("solver: max_halvings must be >= 0");
  if (threads < 1) throw InvalidInput("solver: threads must be >= 1");
}

StepEnergy& StepEnergy::operator+=(const StepEnergy& o) {
  input += o.input;
  magnetic += o.magnetic;
  storage += o.storage;
  storage_state += o.storage_state;
  hyst += o.hyst;
  eddy += o.eddy;
  resistive += o.resistive;
  return *this;
}

TransientSolver::TransientSolver(std::shared_ptr<const Mesh> mesh, MaterialModel model,
                                 CircuitSpec circuit, SolverSettings settings)
    : mesh_(std::move(mesh)),
      space_(*mesh_),
      field_(space_, std::move(model)),
      circuit_(std::move(circuit)),
      settings_(settings) {
  settings_.validate();
  circuit_.validate();
  matrices_ = assemble_dynamic_and_circuit(space_, field_.model(), circuit_);
  circuit_.resistance.assign(matrices_.resistance.data(),
                             matrices_.resistance.data() + matrices_.resistance.size());

  dyn_full_ = matrices_.M_sigma + matrices_.M_sheet;
  if (circuit_.drive == DriveMode::kCurrent) {
    const SparseMatrix XR = matrices_.X * matrices_.resistance.asDiagonal();
    dyn_full_ = dyn_full_ - SparseMatrix(XR * matrices_.X.transpose());
  }
  dyn_full_.makeCompressed();
  build_pattern();
  a_ = VectorXd::Zero(space_.n_nodes());
}

VectorXd TransientSolver::restrict_free(const VectorXd& full) const {
  VectorXd out(space_.n_free());
  for (int n = 0; n < space_.n_nodes(); ++n) {
    const int f = space_.free_index(n);
    if (f >= 0) out[f] = full[n];
  }
  return out;
}

void TransientSolver::build_pattern() {
  const int nf = space_.n_free();
  const auto& mesh = space_.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * static_cast<std::size_t>(space_.n_elements()));
  for (const auto& tri : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int fi = space_.free_index(tri.nodes[i]);
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int fj = space_.free_index(tri.nodes[j]);
        if (fj >= 0) trip.emplace_back(fi, fj, 1.0);
      }
    }
  }
  std::vector<Eigen::Triplet<double>> dyn;
  for (int k = 0; k < dyn_full_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(dyn_full_, k); it; ++it) {
      const int fr = space_.free_index(static_cast<int>(it.row()));
      const int fc = space_.free_index(static_cast<int>(it.col()));
      if (fr >= 0 && fc >= 0) {
        dyn.emplace_back(fr, fc, it.value());
        trip.emplace_back(fr, fc, 1.0);
      }
    }
  }
  dyn_free_.resize(nf, nf);
  dyn_free_.setFromTriplets(dyn.begin(), dyn.end());
  dyn_free_.makeCompressed();
  jacobian_.resize(nf, nf);
  jacobian_.setFromTriplets(trip.begin(), trip.end());
  jacobian_.makeCompressed();

  auto position = [this](int row, int col) {
    const int* outer = jacobian_.outerIndexPtr();
    const int* inner = jacobian_.innerIndexPtr();
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) throw SolverError("jacobian pattern lookup failed");
    return static_cast<int>(it - inner);
  };
  element_slots_.assign(9 * static_cast<std::size_t>(space_.n_elements()), -1);
  for (int e = 0; e < space_.n_elements(); ++e) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)].nodes;
    for (int i = 0; i < 3; ++i) {
      const int fi = space_.free_index(t[i]);
      for (int j = 0; j < 3; ++j) {
        const int fj = space_.free_index(t[j]);
        if (fi >= 0 && fj >= 0) element_slots_[9 * static_cast<std::size_t>(e) + 3 * i + j] = position(fi, fj);
      }
    }
  }
  dyn_slots_.clear();
  dyn_slots_.reserve(static_cast<std::size_t>(dyn_free_.nonZeros()));
  for (int k = 0; k < dyn_free_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(dyn_free_, k); it; ++it) {
      dyn_slots_.push_back(position(static_cast<int>(it.row()), static_cast<int>(it.col())));
    }
  }
}

void TransientSolver::assemble_jacobian(double dt) {
  double* values = jacobian_.valuePtr();
  std::fill(values, values + jacobian_.nonZeros(), 0.0);
  const double* dyn = dyn_free_.valuePtr();
  for (std::size_t k = 0; k < dyn_slots_.size(); ++k) values[dyn_slots_[k]] += dyn[k] / dt;
  const auto& dHdB = field_.dHdB();
  for (int e = 0; e < space_.n_elements(); ++e) {
    const auto& v = space_.curls(e);
    const double area = space_.area(e);
    const Mat2& D = dHdB[static_cast<std::size_t>(e)];
    const int* slot = &element_slots_[9 * static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      const Vec2 Dv = D.transpose() * v[i];
      for (int j = 0; j < 3; ++j) {
        const int s = slot[3 * i + j];
        if (s >= 0) values[s] += area * Dv.dot(v[j]);
      }
    }
  }
}

TransientSolver::StepResult TransientSolver::newton_time_step(double dt, const std::vector<double>& drive) {
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  if (static_cast<int>(drive.size()) != circuit_.n_cond) throw InvalidInput("drive size does not match conductors");
  const Eigen::Map<const VectorXd> source(drive.data(), static_cast<Eigen::Index>(drive.size()));
  const VectorXd& R = matrices_.resistance;
  const VectorXd rhs_full = circuit_.drive == DriveMode::kVoltage
                                ? VectorXd(matrices_.X * source)
                                : VectorXd(matrices_.X * (R.cwiseProduct(source)));
  const double rhs_norm = restrict_free(rhs_full).norm();
  source_scale_ = std::max(source_scale_, rhs_norm);
  const double tolerance = settings_.newton_rtol * source_scale_ + settings_.newton_atol;

  const VectorXd a_prev = a_;
  VectorXd a = a_prev;
  const auto& mesh = space_.mesh();

  auto residual = [&](const VectorXd& a_trial) {
    field_.evaluate(a_trial, settings_.threads);
    VectorXd r = dyn_full_ * ((a_trial - a_prev) / dt) - rhs_full;
    const auto& H = field_.H();
    for (int e = 0; e < space_.n_elements(); ++e) {
      const auto& t = mesh.triangles[static_cast<std::size_t>(e)].nodes;
      const auto& v = space_.curls(e);
      const Vec2 aH = space_.area(e) * H[static_cast<std::size_t>(e)];
      for (int i = 0; i < 3; ++i) r[t[i]] += aH.dot(v[i]);
    }
    return restrict_free(r);
  };

  int iters = 0;
  const bool fixed = settings_.fixed_newton > 0;
  const int limit = fixed ? settings_.fixed_newton : settings_.max_newton;
  VectorXd r = residual(a);
  double norm = r.norm();
  while (true) {
    if (!std::isfinite(norm)) throw StepRejected("non-finite Newton residual", t_ + dt);
    if (fixed ? iters >= limit : (iters >= 1 && norm <= tolerance)) break;
    if (iters >= limit) {
      throw StepRejected("Newton did not converge in " + std::to_string(limit) +
                             " iterations (residual " + std::to_string(norm) + ", target " +
                             std::to_string(tolerance) + ")",
                         t_ + dt);
    }
    assemble_jacobian(dt);
    if (!analyzed_) {
      lu_.analyzePattern(jacobian_);
      analyzed_ = true;
    }
    lu_.factorize(jacobian_);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
    const VectorXd delta = lu_.solve(-r);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU solve failed");

    // Backtracking on the residual norm; the play kinks make full steps cycle.
    // The last trial is taken even without decrease.
    double step = 1.0;
    VectorXd a_trial = a;
    for (int k = 0;; ++k) {
      for (int n = 0; n < space_.n_nodes(); ++n) {
        const int f = space_.free_index(n);
        if (f >= 0) a_trial[n] = a[n] + step * delta[f];
      }
      r = residual(a_trial);
      const double trial = r.norm();
      if (fixed || k >= kMaxBacktracks || (std::isfinite(trial) && trial <= (1.0 - 1e-4 * step) * norm)) {
        norm = trial;
        break;
      }
      step *= 0.5;
    }
    a = std::move(a_trial);
    ++iters;
  }

  // Circuit quantities and energy increments at the accepted iterate.
  StepResult out;
  out.newton_iters = iters;
  out.residual_norm = norm;
  const VectorXd adot = (a - a_prev) / dt;
  const VectorXd flux_rate = matrices_.X.transpose() * adot;
  VectorXd u(circuit_.n_cond), i(circuit_.n_cond);
  if (circuit_.drive == DriveMode::kVoltage) {
    u = source;
    i = matrices_.conductance.cwiseProduct(u) - flux_rate;
  } else {
    i = source;
    u = R.cwiseProduct(i + flux_rate);
  }
  out.u.assign(u.data(), u.data() + u.size());
  out.i.assign(i.data(), i.data() + i.size());

  StepEnergy& en = out.energy;
  en.input = u.dot(i) * dt;
  en.resistive = (adot.dot(matrices_.M_sigma * adot) - 2.0 * adot.dot(matrices_.X * u) +
                  u.dot(matrices_.conductance.cwiseProduct(u))) *
                 dt;
  const double c = field_.model().sheet_coefficient();
  for (int e = 0; e < space_.n_elements(); ++e) {
    const auto se = static_cast<std::size_t>(e);
    const double area = space_.area(e);
    const auto split = field_.energy_split(e, dt);
    en.storage += area * split.storage;
    en.storage_state += area * split.storage_state;
    en.hyst += area * split.hyst;
    en.eddy += area * split.eddy;
    const Vec2 dB = field_.B()[se] - field_.B_committed()[se];
    Vec2 H = field_.H()[se];
    if (field_.iron_slot(e) >= 0) H += c * dB / dt;
    en.magnetic += area * H.dot(dB);
  }

  last_samples_ = sample_probes(out, dt);
  field_.commit();
  a_ = std::move(a);
  t_ += dt;
  newton_total_ += iters;
  return out;
}

void TransientSolver::set_probes(std::vector<Probe> probes) {
  for (auto& p : probes) {
    p.element = mesh_->locate(p.point);
    if (p.element < 0) throw InvalidInput("probe '" + p.label + "' lies outside the mesh");
    if (p.iron && mesh_->triangles[static_cast<std::size_t>(p.element)].region != RegionKind::kIron) {
      throw InvalidInput("BH probe '" + p.label + "' is not inside the iron");
    }
  }
  probes_ = std::move(probes);
}

std::vector<ProbeSample> TransientSolver::sample_probes(const StepResult&, double dt) const {
  std::vector<ProbeSample> out;
  out.reserve(probes_.size());
  const double c = field_.model().sheet_coefficient();
  for (const auto& p : probes_) {
    const auto se = static_cast<std::size_t>(p.element);
    ProbeSample s;
    s.B = field_.B()[se];
    const Vec2 dB = s.B - field_.B_committed()[se];
    s.H = field_.H()[se];
    if (field_.iron_slot(p.element) >= 0) {
      s.H += c * dB / dt;
      const auto split = field_.energy_split(p.element, dt);
      s.dissipation = split.hyst + split.eddy;
      s.energy = field_.committed_energy(p.element) + split.storage_state;
    } else {
      s.energy = 0.5 * kNu0 * s.B.squaredNorm();
    }
    out.push_back(s);
  }
  return out;
}

StepRecord TransientSolver::advance(double t_next) {
  const double t_start = t_;
  StepRecord rec;
  rec.t = t_next;
  rec.substeps = 0;

  // Recursive halving: a failed (uncommitted) step is split into two halves.
  auto attempt = [&](auto&& self, double t_end, int depth) -> void {
    const double dt = t_end - t_;
    try {
      StepResult r = newton_time_step(dt, circuit_.drive_values(t_end));
      rec.energy += r.energy;
      rec.newton_iters += r.newton_iters;
      rec.residual = std::max(rec.residual, r.residual_norm);
      rec.u = std::move(r.u);
      rec.i = std::move(r.i);
      ++rec.substeps;
      if (rec.probes.empty()) {
        rec.probes = last_samples_;
      } else {
        for (std::size_t k = 0; k < rec.probes.size(); ++k) {
          rec.probes[k].dissipation += last_samples_[k].dissipation;
          rec.probes[k].B = last_samples_[k].B;
          rec.probes[k].H = last_samples_[k].H;
          rec.probes[k].energy = last_samples_[k].energy;
        }
      }
    } catch (const SolverError& ex) {
      if (dynamic_cast<const StepRejected*>(&ex) == nullptr && dynamic_cast<const MaterialError*>(&ex) == nullptr) {
        throw;
      }
      if (depth >= settings_.max_halvings) {
        throw StepRejected(std::string("step failed after ") + std::to_string(depth) +
                               " halvings: " + ex.what(),
                           t_end);
      }
      const double t_mid = t_ + 0.5 * dt;
      self(self, t_mid, depth + 1);
      self(self, t_end, depth + 1);
    }
  };
  attempt(attempt, t_next, 0);
  t_ = t_next;  // remove round-off of the substep sum
  (void)t_start;
  return rec;
}

SolutionArchive transient_solve(const TransientProblem& problem) {
  return transient_solve(problem, std::make_shared<const Mesh>(build_mesh(problem.geometry)));
}

SolutionArchive transient_solve(const TransientProblem& problem, std::shared_ptr<const Mesh> mesh) {
  if (!(problem.dt > 0.0)) throw InvalidInput("dt must be positive");
  if (problem.duration < 0.0) throw InvalidInput("duration must be non-negative");
  const double ratio = problem.duration / problem.dt;
  const long long n_steps = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(n_steps)) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidInput("duration must be a multiple of dt");
  }
  const auto wall_start = std::chrono::steady_clock::now();
  TransientSolver solver(mesh, problem.model, problem.circuit, problem.solver);
  solver.set_probes(problem.probes);

  SolutionArchive archive;
  archive.mesh = mesh;
  archive.model = solver.field().model();
  archive.dt = problem.dt;
  archive.period = problem.circuit.per_conductor.empty() ? problem.circuit.source.period() : 0.0;
  archive.drive = problem.circuit.drive;
  archive.probes = problem.probes;
  for (auto& p : archive.probes) p.element = mesh->locate(p.point);
  archive.times.push_back(0.0);
  if (problem.keep_potentials) archive.potentials.push_back(solver.potential());
  archive.steps.reserve(static_cast<std::size_t>(n_steps));
  for (long long n = 1; n <= n_steps; ++n) {
    const double t = static_cast<double>(n) * problem.dt;
    archive.steps.push_back(solver.advance(t));
    archive.times.push_back(t);
    if (problem.keep_potentials) archive.potentials.push_back(solver.potential());
  }
  archive.material_seconds = solver.field().material_seconds();
  archive.material_evaluations = solver.field().material_evaluations();
  archive.newton_total = solver.newton_total();
  archive.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return archive;
}

}  // namespace hystermag
