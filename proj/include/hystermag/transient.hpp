#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "hystermag/fem.hpp"

namespace hystermag {

struct SolverSettings {
  /// Newton stops when |residual| <= rtol * source scale + atol.
  double newton_rtol = 1e-6;
  double newton_atol = 1e-9;
  int max_newton = 30;
  /// > 0: run exactly this many Newton updates per step (runtime studies).
  int fixed_newton = 0;
  /// Number of times a failing step may be halved before giving up.
  int max_halvings = 3;
  int threads = 1;

  void validate() const;
};

/// Energy increments of one step, J/m over the modelled cross-section.
struct StepEnergy {
  double input = 0.0;          ///< sum_m u_m i_m dt
  double magnetic = 0.0;       ///< (v, H) . da, all magnetic power
  double storage = 0.0;        ///< discrete stored-energy increment
  double storage_state = 0.0;  ///< change of the stored-energy state function
  double hyst = 0.0;
  double eddy = 0.0;
  double resistive = 0.0;      ///< int sigma |E|^2 dt over the conductors

  /// input - (storage + hyst + eddy + resistive)
  double closure_defect() const { return input - (storage + hyst + eddy + resistive); }
  /// Same loss from the terminal side: input - magnetic.
  double resistive_terminal() const { return input - magnetic; }
  StepEnergy& operator+=(const StepEnergy& o);
};

struct ProbeSample {
  Vec2 B = Vec2::Zero();
  Vec2 H = Vec2::Zero();       ///< total field strength incl. the sheet term
  double dissipation = 0.0;    ///< (p_hyst + p_eddy) dt over the step, J/m^3
  double energy = 0.0;         ///< stored-energy density after the step, J/m^3
};

struct Probe {
  std::string label;
  Vec2 point = Vec2::Zero();
  bool iron = false;  ///< BH probe: must lie in the iron
  int element = -1;
};

struct StepRecord {
  double t = 0.0;
  std::vector<double> u, i;
  StepEnergy energy;
  std::vector<ProbeSample> probes;
  int newton_iters = 0;
  int substeps = 1;
  double residual = 0.0;
};

struct SolutionArchive {
  std::shared_ptr<const Mesh> mesh;
  MaterialModel model;
  double dt = 0.0;
  double period = 0.0;        ///< source period (0 if aperiodic)
  DriveMode drive = DriveMode::kCurrent;
  std::vector<Probe> probes;
  std::vector<double> times;  ///< t_0 = 0 and every accepted step
  std::vector<VectorXd> potentials;
  std::vector<StepRecord> steps;
  double material_seconds = 0.0;
  long long material_evaluations = 0;
  double wall_seconds = 0.0;
  long long newton_total = 0;
};

/// Implicit-Euler field-circuit stepper.
///
/// Voltage drive:  h(a) + (M_sigma + M_sheet) da/dt = X u
/// Current drive:  h(a) + (M_sigma + M_sheet - X R X^T) da/dt = X R i
/// Dirichlet dofs are eliminated; material states are committed only when
/// a step is accepted.
class TransientSolver {
 public:
  TransientSolver(std::shared_ptr<const Mesh> mesh, MaterialModel model, CircuitSpec circuit,
                  SolverSettings settings = {});

  struct StepResult {
    int newton_iters = 0;
    double residual_norm = 0.0;
    StepEnergy energy;
    std::vector<double> u, i;
  };

  /// One implicit-Euler step of size dt with the given per-conductor source
  /// (currents or voltages). Commits on success; throws StepRejected when
  /// Newton does not converge and MaterialError on inversion failure.
  StepResult newton_time_step(double dt, const std::vector<double>& drive);

  /// Advances to t_next, halving the step on failure up to max_halvings.
  StepRecord advance(double t_next);

  void set_probes(std::vector<Probe> probes);
  std::vector<ProbeSample> sample_probes(const StepResult&, double dt) const;

  double time() const { return t_; }
  const VectorXd& potential() const { return a_; }
  const FeSpace& space() const { return space_; }
  const MaterialField& field() const { return field_; }
  const CircuitMatrices& circuit_matrices() const { return matrices_; }
  const CircuitSpec& circuit() const { return circuit_; }
  const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }
  long long newton_total() const { return newton_total_; }

 private:
  void build_pattern();
  void assemble_jacobian(double dt);
  VectorXd restrict_free(const VectorXd& full) const;

  std::shared_ptr<const Mesh> mesh_;
  FeSpace space_;
  MaterialField field_;
  CircuitSpec circuit_;
  SolverSettings settings_;
  CircuitMatrices matrices_;

  SparseMatrix dyn_full_;   // M_sigma + M_sheet [- X R X^T]
  SparseMatrix dyn_free_;
  SparseMatrix jacobian_;   // free x free
  std::vector<int> element_slots_;
  std::vector<int> dyn_slots_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;

  VectorXd a_;
  double t_ = 0.0;
  double source_scale_ = 0.0;
  long long newton_total_ = 0;
  std::vector<Probe> probes_;
  std::vector<ProbeSample> last_samples_;
};

/// Everything needed for one transient run.
struct TransientProblem {
  GeometrySpec geometry;
  MaterialModel model;
  CircuitSpec circuit;
  SolverSettings solver;
  double dt = 1e-5;
  double duration = 0.0;
  std::vector<Probe> probes;
  bool keep_potentials = true;
};

/// Runs from a = 0 and virgin material states for duration/dt steps.
SolutionArchive transient_solve(const TransientProblem& problem);
SolutionArchive transient_solve(const TransientProblem& problem, std::shared_ptr<const Mesh> mesh);

}  // namespace hystermag
