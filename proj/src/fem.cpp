#include "hystermag/fem.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hystermag/errors.hpp"
#include "hystermag/parallel.hpp"

namespace hystermag {

FeSpace::FeSpace(const Mesh& mesh) : mesh_(&mesh) {
  const std::size_t ne = mesh.triangles.size();
  area_.resize(ne);
  curl_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = mesh.triangles[e].nodes;
    const Vec2& p0 = mesh.nodes[t[0]];
    const Vec2& p1 = mesh.nodes[t[1]];
    const Vec2& p2 = mesh.nodes[t[2]];
    const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    area_[e] = 0.5 * det;
    const std::array<const Vec2*, 3> p{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
      const Vec2& pj = *p[(i + 1) % 3];
      const Vec2& pk = *p[(i + 2) % 3];
      const Vec2 grad((pj.y() - pk.y()) / det, (pk.x() - pj.x()) / det);
      curl_[e][i] = Vec2(grad.y(), -grad.x());
    }
  }
  free_index_.assign(mesh.nodes.size(), -1);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    if (!mesh.dirichlet[n]) free_index_[n] = n_free_++;
  }
}

Vec2 FeSpace::flux_density(int e, const VectorXd& a) const {
  const auto& t = mesh_->triangles[static_cast<std::size_t>(e)].nodes;
  const auto& v = curl_[static_cast<std::size_t>(e)];
  return a[t[0]] * v[0] + a[t[1]] * v[1] + a[t[2]] * v[2];
}

SparseMatrix FeSpace::laplace_stiffness() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * area_.size());
  for (int e = 0; e < n_elements(); ++e) {
    const auto& t = mesh_->triangles[static_cast<std::size_t>(e)].nodes;
    const auto& v = curls(e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area(e) * v[i].dot(v[j]));
  }
  SparseMatrix S(n_nodes(), n_nodes());
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

void MaterialModel::complete() {
  if (!curve) curve = std::make_shared<const AnhystereticCurve>();
  if (!play) play = std::make_shared<const PlayConfig>(PlayConfig::m235_35a(curve));
  if (law == IronLaw::kLinear && !(mu_r_linear >= 1.0)) throw InvalidInput("linear iron needs mu_r >= 1");
  sheet.validate();
  inversion.validate();
}

MaterialField::MaterialField(const FeSpace& space, MaterialModel model)
    : space_(&space), model_(std::move(model)) {
  model_.complete();
  const auto& mesh = space.mesh();
  const std::size_t ne = mesh.triangles.size();
  slot_.assign(ne, -1);
  for (std::size_t e = 0; e < ne; ++e) {
    if (mesh.triangles[e].region == RegionKind::kIron) {
      slot_[e] = static_cast<int>(iron_elements_.size());
      iron_elements_.push_back(static_cast<int>(e));
    }
  }
  B_.assign(ne, Vec2::Zero());
  H_ = B_prev_ = H_prev_ = B_;
  H_guess_.assign(iron_elements_.size(), Vec2::Zero());
  dHdB_.assign(ne, kNu0 * Mat2::Identity());
  if (model_.law == IronLaw::kHysteretic) {
    states_.assign(iron_elements_.size(), PlayState::virgin(*model_.play));
    trial_states_ = states_;
  }
}

void MaterialField::evaluate_iron(int slot, const Vec2& B) {
  const int e = iron_elements_[static_cast<std::size_t>(slot)];
  const auto se = static_cast<std::size_t>(e);
  switch (model_.law) {
    case IronLaw::kLinear: {
      const double nu = kNu0 / model_.mu_r_linear;
      H_[se] = nu * B;
      dHdB_[se] = nu * Mat2::Identity();
      return;
    }
    case IronLaw::kAnhysteretic: {
      try {
        H_[se] = model_.curve->invert(B);
      } catch (const OutOfRange& ex) {
        throw MaterialError(std::string("anhysteretic inverse failed: ") + ex.what(), e);
      }
      dHdB_[se] = model_.curve->eval(H_[se]).dBdH.inverse();
      return;
    }
    case IronLaw::kHysteretic: {
      const auto ss = static_cast<std::size_t>(slot);
      const InversionResult r =
          invert(*model_.play, model_.inversion, states_[ss], B, H_guess_[ss]);
      if (!r.converged) {
        throw MaterialError("hysteretic inversion did not converge at element " + std::to_string(e) +
                                " (relative error " + std::to_string(r.rel_error) + ")",
                            e);
      }
      HystEval ev = eval_hyst(*model_.play, states_[ss], r.H);
      H_[se] = r.H;
      H_guess_[ss] = r.H;
      dHdB_[se] = ev.dBdH.inverse();
      trial_states_[ss] = std::move(ev.state);
      return;
    }
  }
}

void MaterialField::evaluate(const VectorXd& a, int threads) {
  const auto& mesh = space_->mesh();
  for (int e = 0; e < space_->n_elements(); ++e) {
    const auto se = static_cast<std::size_t>(e);
    B_[se] = space_->flux_density(e, a);
    if (mesh.triangles[se].region != RegionKind::kIron) {
      H_[se] = kNu0 * B_[se];
      dHdB_[se] = kNu0 * Mat2::Identity();
    }
  }
  const auto start = std::chrono::steady_clock::now();
  parallel_for(iron_elements_.size(), threads, [&](std::size_t slot) {
    evaluate_iron(static_cast<int>(slot), B_[static_cast<std::size_t>(iron_elements_[slot])]);
  });
  material_seconds_ +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  material_evaluations_ += static_cast<long long>(iron_elements_.size());
}

double MaterialField::stored_energy_at(int element, const Vec2& H, const PlayState* state) const {
  const auto se = static_cast<std::size_t>(element);
  if (space_->mesh().triangles[se].region != RegionKind::kIron) {
    return 0.5 * kMu0 * H.squaredNorm();
  }
  switch (model_.law) {
    case IronLaw::kLinear:
      return 0.5 * kMu0 * model_.mu_r_linear * H.squaredNorm();
    case IronLaw::kAnhysteretic:
      return 0.5 * kMu0 * H.squaredNorm() + model_.curve->cell_energy(H.norm());
    case IronLaw::kHysteretic:
      return stored_energy(*model_.play, *state, H);
  }
  return 0.0;
}

double MaterialField::committed_energy(int element) const {
  const int slot = slot_[static_cast<std::size_t>(element)];
  const PlayState* state =
      (slot >= 0 && model_.law == IronLaw::kHysteretic) ? &states_[static_cast<std::size_t>(slot)] : nullptr;
  return stored_energy_at(element, H_prev_[static_cast<std::size_t>(element)], state);
}

MaterialField::EnergySplit MaterialField::energy_split(int element, double dt) const {
  const auto se = static_cast<std::size_t>(element);
  const int slot = slot_[se];
  const Vec2 dB = B_[se] - B_prev_[se];
  EnergySplit out;
  if (slot >= 0 && model_.law == IronLaw::kHysteretic) {
    const auto ss = static_cast<std::size_t>(slot);
    const PowerRates rates =
        loss_and_energy_rates(*model_.play, states_[ss], trial_states_[ss], H_prev_[se], H_[se], dt);
    out.storage = rates.w_mag_rate * dt;
    out.hyst = rates.p_hyst * dt;
    out.storage_state =
        stored_energy_at(element, H_[se], &trial_states_[ss]) - stored_energy_at(element, H_prev_[se], &states_[ss]);
  } else {
    out.storage = H_[se].dot(dB);
    out.storage_state = stored_energy_at(element, H_[se], nullptr) - stored_energy_at(element, H_prev_[se], nullptr);
  }
  if (slot >= 0 && model_.dynamic) {
    out.eddy = model_.sheet.coefficient() * dB.squaredNorm() / dt;
  }
  return out;
}

void MaterialField::commit() {
  B_prev_ = B_;
  H_prev_ = H_;
  if (model_.law == IronLaw::kHysteretic) states_ = trial_states_;
}

StaticAssembly assemble_static(MaterialField& field, const VectorXd& a, int threads) {
  const FeSpace& space = field.space();
  field.evaluate(a, threads);
  StaticAssembly out;
  out.h = VectorXd::Zero(space.n_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * static_cast<std::size_t>(space.n_elements()));
  for (int e = 0; e < space.n_elements(); ++e) {
    const auto se = static_cast<std::size_t>(e);
    const auto& t = space.mesh().triangles[se].nodes;
    const auto& v = space.curls(e);
    const double area = space.area(e);
    const Vec2& H = field.H()[se];
    const Mat2& D = field.dHdB()[se];
    for (int i = 0; i < 3; ++i) {
      out.h[t[i]] += area * H.dot(v[i]);
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area * v[i].dot(D * v[j]));
    }
  }
  out.jacobian.resize(space.n_nodes(), space.n_nodes());
  out.jacobian.setFromTriplets(trip.begin(), trip.end());
  return out;
}

CircuitMatrices assemble_dynamic_and_circuit(const FeSpace& space, const MaterialModel& model,
                                             const CircuitSpec& circuit) {
  const auto& mesh = space.mesh();
  const int n = space.n_nodes();
  const int n_cond = mesh.n_conductors;
  if (circuit.n_cond != n_cond) {
    throw ConfigError("circuit has " + std::to_string(circuit.n_cond) + " conductors, geometry has " +
                      std::to_string(n_cond));
  }
  const double sigma = model.sigma_conductor;
  const double c = model.sheet_coefficient();
  std::vector<Eigen::Triplet<double>> mass, coupling, sheet;
  CircuitMatrices out;
  out.cross_section = VectorXd::Zero(n_cond);
  for (int e = 0; e < space.n_elements(); ++e) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const auto& t = tri.nodes;
    const double area = space.area(e);
    if (tri.region == RegionKind::kConductor) {
      out.cross_section[tri.conductor] += area;
      if (sigma != 0.0) {
        for (int i = 0; i < 3; ++i) {
          coupling.emplace_back(t[i], tri.conductor, sigma * area / 3.0);
          for (int j = 0; j < 3; ++j) {
            mass.emplace_back(t[i], t[j], sigma * area * (i == j ? 2.0 : 1.0) / 12.0);
          }
        }
      }
    } else if (tri.region == RegionKind::kIron && c != 0.0) {
      const auto& v = space.curls(e);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sheet.emplace_back(t[i], t[j], c * area * v[i].dot(v[j]));
    }
  }
  out.M_sigma.resize(n, n);
  out.M_sigma.setFromTriplets(mass.begin(), mass.end());
  out.X.resize(n, n_cond);
  out.X.setFromTriplets(coupling.begin(), coupling.end());
  out.M_sheet.resize(n, n);
  out.M_sheet.setFromTriplets(sheet.begin(), sheet.end());

  // Model length l = 1 m: G_m = sigma S_m / l.
  out.conductance = sigma * out.cross_section;
  out.resistance.resize(n_cond);
  for (int m = 0; m < n_cond; ++m) {
    if (out.conductance[m] > 0.0) {
      out.resistance[m] = 1.0 / out.conductance[m];
    } else if (circuit.drive == DriveMode::kCurrent) {
      throw ConfigError("conductor " + std::to_string(m) +
                        " has zero conductance; current drive needs R_m = 1/G_m");
    } else {
      out.resistance[m] = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

}  // namespace hystermag
