#include "hystermag/hysteresis.hpp"

#include <cmath>
#include <numeric>

#include "hystermag/errors.hpp"

namespace hystermag {

namespace {

constexpr double kWeightSumTolerance = 1e-6;

void check_state(const PlayConfig& cfg, const PlayState& state) {
  if (state.Hr.size() != cfg.cells()) {
    throw InvalidInput("play state has " + std::to_string(state.Hr.size()) + " cells, config has " +
                       std::to_string(cfg.cells()));
  }
}

void check_field(const Vec2& H) {
  if (!H.allFinite()) throw InvalidInput("hysteresis: non-finite applied field");
}

}  // namespace

PlayConfig::PlayConfig(std::vector<double> weights, std::vector<double> kappa,
                       std::shared_ptr<const AnhystereticCurve> curve)
    : weights_(std::move(weights)), kappa_(std::move(kappa)), curve_(std::move(curve)) {
  if (!curve_) throw InvalidInput("play config needs an anhysteretic curve");
  if (weights_.empty() || weights_.size() != kappa_.size()) {
    throw InvalidInput("play config: weights and pinning forces must have equal, non-zero length");
  }
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw InvalidInput("play config: weights sum to " + std::to_string(sum) + ", expected 1");
  }
  for (std::size_t k = 0; k < kappa_.size(); ++k) {
    if (weights_[k] < 0.0) throw InvalidInput("play config: negative weight");
    if (!(kappa_[k] >= 0.0)) throw InvalidInput("play config: negative pinning force");
    if (k > 0 && kappa_[k] < kappa_[k - 1]) {
      throw InvalidInput("play config: pinning forces must be sorted non-decreasing");
    }
  }
  if (kappa_.front() != 0.0) throw InvalidInput("play config: first cell must be reversible (kappa = 0)");
}

std::vector<double> PlayConfig::m235_35a_weights() {
  return {0.07548, 0.10322, 0.10637, 0.34187, 0.11947, 0.10531,
          0.05298, 0.04347, 0.02820, 0.01931, 0.00551};
}

std::vector<double> PlayConfig::m235_35a_kappa() {
  return {0.0,      7.34865,  18.82524, 32.11778, 45.51681, 55.76191,
          66.86223, 80.55601, 99.10729, 143.04169, 213.50904};
}

PlayConfig PlayConfig::m235_35a(std::shared_ptr<const AnhystereticCurve> curve) {
  if (!curve) curve = std::make_shared<const AnhystereticCurve>();
  auto w = m235_35a_weights();
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& wk : w) wk /= sum;
  return PlayConfig(std::move(w), m235_35a_kappa(), std::move(curve));
}

PlayState play_update(const PlayConfig& cfg, const PlayState& state, const Vec2& H) {
  check_state(cfg, state);
  check_field(H);
  PlayState next = state;
  const auto& kappa = cfg.kappa();
  for (std::size_t k = 0; k < cfg.cells(); ++k) {
    const Vec2 delta = H - state.Hr[k];
    const double norm = delta.norm();
    if (norm > kappa[k]) next.Hr[k] = H - (kappa[k] / norm) * delta;
  }
  return next;
}

Vec2 hysteretic_flux_density(const PlayConfig& cfg, const PlayState& prev, const Vec2& H) {
  check_state(cfg, prev);
  check_field(H);
  const auto& curve = cfg.curve();
  const auto& kappa = cfg.kappa();
  const auto& w = cfg.weights();
  Vec2 B = kMu0 * H;
  for (std::size_t k = 0; k < cfg.cells(); ++k) {
    const Vec2 delta = H - prev.Hr[k];
    const double norm = delta.norm();
    const Vec2 hr = norm > kappa[k] ? Vec2(H - (kappa[k] / norm) * delta) : prev.Hr[k];
    B += w[k] * curve.magnetization(hr);
  }
  return B;
}

HystEval eval_hyst(const PlayConfig& cfg, const PlayState& prev, const Vec2& H) {
  check_state(cfg, prev);
  check_field(H);
  const auto& curve = cfg.curve();
  const auto& kappa = cfg.kappa();
  const auto& w = cfg.weights();
  HystEval out{kMu0 * H, kMu0 * Mat2::Identity(), prev};
  for (std::size_t k = 0; k < cfg.cells(); ++k) {
    const Vec2 delta = H - prev.Hr[k];
    const double norm = delta.norm();
    const bool moving = norm > kappa[k];
    if (moving) out.state.Hr[k] = H - (kappa[k] / norm) * delta;
    const AnhystereticEval an = curve.eval(out.state.Hr[k]);
    // eval() adds the vacuum part; the cell only contributes magnetization.
    out.B += w[k] * an.M;
    if (moving) {
      const Mat2 dMdHr = an.dBdH - kMu0 * Mat2::Identity();
      const Vec2 e = delta / norm;
      const Mat2 dHrdH =
          Mat2::Identity() - (kappa[k] / norm) * (Mat2::Identity() - e * e.transpose());
      out.dBdH += w[k] * dMdHr * dHrdH;
    }
  }
  return out;
}

PowerRates loss_and_energy_rates(const PlayConfig& cfg, const PlayState& prev_state,
                                 const PlayState& new_state, const Vec2& H_prev,
                                 const Vec2& H_new, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("loss rates: dt must be positive");
  check_state(cfg, prev_state);
  check_state(cfg, new_state);
  const auto& curve = cfg.curve();
  const auto& w = cfg.weights();
  double loss = 0.0;
  double storage = kMu0 * H_new.dot(H_new - H_prev);
  for (std::size_t k = 0; k < cfg.cells(); ++k) {
    if (new_state.Hr[k] == prev_state.Hr[k]) continue;
    const Vec2 dM =
        w[k] * (curve.magnetization(new_state.Hr[k]) - curve.magnetization(prev_state.Hr[k]));
    loss += (H_new - new_state.Hr[k]).dot(dM);
    storage += new_state.Hr[k].dot(dM);
  }
  return {loss / dt, storage / dt};
}

double stored_energy(const PlayConfig& cfg, const PlayState& state, const Vec2& H) {
  check_state(cfg, state);
  double w_mag = 0.5 * kMu0 * H.squaredNorm();
  for (std::size_t k = 0; k < cfg.cells(); ++k) {
    w_mag += cfg.weights()[k] * cfg.curve().cell_energy(state.Hr[k].norm());
  }
  return w_mag;
}

PlayState prepare_major_branch(const PlayConfig& cfg, const Vec2& H_extreme, const Vec2& H_stop,
                               int steps) {
  check_field(H_extreme);
  check_field(H_stop);
  if (steps < 1) throw InvalidInput("prepare_major_branch: steps must be >= 1");
  if (!(H_extreme.norm() > 2.0 * cfg.max_kappa())) {
    throw InvalidInput("prepare_major_branch: |H_extreme| must exceed twice the largest pinning force");
  }
  PlayState state = PlayState::virgin(cfg);
  for (int i = 1; i <= steps; ++i) {
    state = play_update(cfg, state, (static_cast<double>(i) / steps) * H_extreme);
  }
  for (int i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    state = play_update(cfg, state, (1.0 - t) * H_extreme + t * H_stop);
  }
  return state;
}

}  // namespace hystermag
