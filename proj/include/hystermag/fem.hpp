#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hystermag/anhysteretic.hpp"
#include "hystermag/dynamic_sheet.hpp"
#include "hystermag/excitation.hpp"
#include "hystermag/hysteresis.hpp"
#include "hystermag/inversion.hpp"
#include "hystermag/mesh.hpp"

namespace hystermag {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

/// Lowest-order nodal space for the out-of-plane potential a_z. The in-plane
/// flux density of a triangle is B = sum_i a_i v_i with v_i = curl(N_i e_z).
class FeSpace {
 public:
  explicit FeSpace(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int n_nodes() const { return static_cast<int>(mesh_->nodes.size()); }
  int n_elements() const { return static_cast<int>(mesh_->triangles.size()); }
  int n_free() const { return n_free_; }
  /// Free-dof index of a node, -1 for Dirichlet nodes.
  int free_index(int node) const { return free_index_[static_cast<std::size_t>(node)]; }

  double area(int e) const { return area_[static_cast<std::size_t>(e)]; }
  const std::array<Vec2, 3>& curls(int e) const { return curl_[static_cast<std::size_t>(e)]; }
  Vec2 flux_density(int e, const VectorXd& a) const;

  /// Scalar Laplace stiffness (grad N_i, grad N_j) over all elements.
  SparseMatrix laplace_stiffness() const;

 private:
  const Mesh* mesh_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> curl_;
  std::vector<int> free_index_;
  int n_free_ = 0;
};

enum class IronLaw { kLinear, kAnhysteretic, kHysteretic };

/// Material selection: iron law x {static, dynamic} plus the region
/// conductivities.
struct MaterialModel {
  IronLaw law = IronLaw::kAnhysteretic;
  bool dynamic = false;
  double mu_r_linear = 1000.0;  ///< iron permeability for IronLaw::kLinear
  std::shared_ptr<const AnhystereticCurve> curve;
  std::shared_ptr<const PlayConfig> play;
  SheetParams sheet;
  InversionSettings inversion{InversionScheme::kSafeguarded, 1e-10, 20, 0.0, 1e-3};
  double sigma_conductor = 5.8e7;  ///< S/m

  /// Fills the default curve/cell table where missing.
  void complete();
  double sheet_coefficient() const { return dynamic ? sheet.coefficient() : 0.0; }
};

/// Per-element constitutive data for one potential iterate: static field
/// strength H(B) and its tangent dH/dB. Iron points of the hysteretic law
/// carry their committed play state; trial evaluations never modify it.
class MaterialField {
 public:
  MaterialField(const FeSpace& space, MaterialModel model);

  const MaterialModel& model() const { return model_; }
  const FeSpace& space() const { return *space_; }

  /// Evaluates every element at potential a. Iron points run in parallel on
  /// `threads` workers; throws MaterialError on inversion failure.
  void evaluate(const VectorXd& a, int threads = 1);

  const std::vector<Vec2>& B() const { return B_; }
  const std::vector<Vec2>& H() const { return H_; }
  const std::vector<Mat2>& dHdB() const { return dHdB_; }
  /// Committed static H and B at the previous accepted time.
  const std::vector<Vec2>& H_committed() const { return H_prev_; }
  const std::vector<Vec2>& B_committed() const { return B_prev_; }
  const PlayState& committed_state(int iron_slot) const { return states_[static_cast<std::size_t>(iron_slot)]; }
  /// Iron slot of an element, -1 outside the iron.
  int iron_slot(int element) const { return slot_[static_cast<std::size_t>(element)]; }

  /// Energy-density split of one element between the committed state and
  /// the current evaluation (backward differences, J/m^3 over the step).
  struct EnergySplit {
    double storage = 0.0;        ///< discrete storage increment
    double storage_state = 0.0;  ///< change of the stored-energy state function
    double hyst = 0.0;
    double eddy = 0.0;
  };
  EnergySplit energy_split(int element, double dt) const;
  /// Stored-energy density at the committed state.
  double committed_energy(int element) const;

  /// Accepts the current evaluation as the new committed state.
  void commit();

  /// Wall time spent in the iron-point evaluation since construction.
  double material_seconds() const { return material_seconds_; }
  long long material_evaluations() const { return material_evaluations_; }

 private:
  void evaluate_iron(int slot, const Vec2& B);
  double stored_energy_at(int element, const Vec2& H, const PlayState* state) const;

  const FeSpace* space_;
  MaterialModel model_;
  std::vector<int> slot_;
  std::vector<int> iron_elements_;
  std::vector<Vec2> B_, H_, B_prev_, H_prev_, H_guess_;
  std::vector<Mat2> dHdB_;
  std::vector<PlayState> states_, trial_states_;
  double material_seconds_ = 0.0;
  long long material_evaluations_ = 0;
};

/// Weighted field-strength vector h_j = (v_j, H) and Jacobian
/// (v_j, dH/dB v_k) on all nodes (Dirichlet rows included).
struct StaticAssembly {
  VectorXd h;
  SparseMatrix jacobian;
};

/// Evaluates `field` at a and assembles the static part of the system.
StaticAssembly assemble_static(MaterialField& field, const VectorXd& a, int threads = 1);

/// Conductivity mass matrix M_sigma = (w_j, sigma w_k), coupling
/// X = (w_j, sigma x_m) with x_m = chi_m / l (l = 1 m) and the lamination
/// matrix M_sheet = (v_j, c v_k) over the iron.
struct CircuitMatrices {
  SparseMatrix M_sigma;
  SparseMatrix X;        ///< n_nodes x n_cond
  SparseMatrix M_sheet;
  VectorXd conductance;  ///< G_m = sigma S_m, S
  VectorXd resistance;   ///< R_m = 1/G_m, ohm (inf when G_m = 0)
  VectorXd cross_section;
};

CircuitMatrices assemble_dynamic_and_circuit(const FeSpace& space, const MaterialModel& model,
                                             const CircuitSpec& circuit);

}  // namespace hystermag
