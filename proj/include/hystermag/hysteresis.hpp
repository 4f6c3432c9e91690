#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hystermag/anhysteretic.hpp"
#include "hystermag/types.hpp"

namespace hystermag {

/// Cell weights and pinning forces of the energy-based model.
///
/// Invariants: weights sum to one (1e-6), pinning forces are non-negative and
/// sorted with the first cell reversible (kappa = 0).
class PlayConfig {
 public:
  PlayConfig(std::vector<double> weights, std::vector<double> kappa,
             std::shared_ptr<const AnhystereticCurve> curve);

  /// M235-35A cell table (weights normalised to unit sum) on the default curve.
  static PlayConfig m235_35a(std::shared_ptr<const AnhystereticCurve> curve = nullptr);
  /// The published cell table, unnormalised.
  static std::vector<double> m235_35a_weights();
  static std::vector<double> m235_35a_kappa();

  std::size_t cells() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& kappa() const { return kappa_; }
  double max_kappa() const { return kappa_.back(); }
  const AnhystereticCurve& curve() const { return *curve_; }
  const std::shared_ptr<const AnhystereticCurve>& curve_ptr() const { return curve_; }

 private:
  std::vector<double> weights_;
  std::vector<double> kappa_;
  std::shared_ptr<const AnhystereticCurve> curve_;
};

/// Reversible fields H_r^k of one evaluation point.
struct PlayState {
  std::vector<Vec2> Hr;

  static PlayState virgin(const PlayConfig& cfg) { return PlayState{std::vector<Vec2>(cfg.cells(), Vec2::Zero())}; }
  bool operator==(const PlayState&) const = default;
};

/// Vector-play update of every cell for the applied field H.
PlayState play_update(const PlayConfig& cfg, const PlayState& state, const Vec2& H);

/// Flux density for the applied field H, cells updated from `prev`.
/// Cheaper than eval_hyst: no tensor, no state copy.
Vec2 hysteretic_flux_density(const PlayConfig& cfg, const PlayState& prev, const Vec2& H);

struct HystEval {
  Vec2 B;
  Mat2 dBdH;
  PlayState state;
};

/// B = mu0 H + sum_k w_k mu0 M_an(H_r^k) with the chain-rule tangent
/// dB/dH = mu0 I + sum_moving w_k dM_an/dH_r * dH_r/dH.
HystEval eval_hyst(const PlayConfig& cfg, const PlayState& prev, const Vec2& H);

struct PowerRates {
  double p_hyst;      ///< W/m^3
  double w_mag_rate;  ///< W/m^3
};

/// Hysteresis loss and stored-energy rate between two consecutive states,
/// using backward differences (values at the new step):
///   p_hyst  = sum_k (H - H_r^k) . mu0 dM_k/dt
///   dw/dt   = H . mu0 dH/dt + sum_k H_r^k . mu0 dM_k/dt
/// Their sum equals H_new . (B_new - B_prev)/dt exactly.
PowerRates loss_and_energy_rates(const PlayConfig& cfg, const PlayState& prev_state,
                                 const PlayState& new_state, const Vec2& H_prev,
                                 const Vec2& H_new, double dt);

/// Stored magnetic energy density mu0|H|^2/2 + sum_k w_k psi(|H_r^k|) (J/m^3),
/// a function of state.
double stored_energy(const PlayConfig& cfg, const PlayState& state, const Vec2& H);

/// Drives a virgin point to H_extreme, then along a straight line to H_stop
/// in `steps` increments.
PlayState prepare_major_branch(const PlayConfig& cfg, const Vec2& H_extreme, const Vec2& H_stop,
                               int steps = 64);

}  // namespace hystermag
