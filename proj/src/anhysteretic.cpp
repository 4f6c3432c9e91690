#include "hystermag/anhysteretic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hystermag/errors.hpp"

namespace hystermag {

namespace {

// Below this argument L(x) and L'(x) use their series; coth(x) - 1/x and
// 1/x^2 - 1/sinh^2(x) cancel badly for small x.
constexpr double kSeriesLimit = 0.3;

// Taylor coefficients of L(x)/x in powers of x^2: 2^2n B_2n / (2n)!.
constexpr double kLangevinSeries[] = {
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 162820783125.0,
};

// L(x)/x for |x| < kSeriesLimit.
double langevin_series_over_x(double x2) {
  double sum = 0.0;
  for (int n = 7; n >= 0; --n) sum = sum * x2 + kLangevinSeries[n];
  return sum;
}

// L'(x) for |x| < kSeriesLimit.
double langevin_slope_series(double x2) {
  double sum = 0.0;
  for (int n = 7; n >= 0; --n) sum = sum * x2 + (2 * n + 1) * kLangevinSeries[n];
  return sum;
}

// L(x)/x, even in x.
double langevin_over_x(double x) {
  const double ax = std::abs(x);
  if (ax < kSeriesLimit) return langevin_series_over_x(ax * ax);
  return langevin(ax) / ax;
}

// ln(sinh(x)/x) for |x| < kSeriesLimit: the term-wise integral of L.
double log_sinhc_series(double x2) {
  double sum = 0.0;
  for (int n = 7; n >= 0; --n) sum = sum * x2 + kLangevinSeries[n] / (2 * n + 2);
  return sum * x2;
}

// x L(x) - ln(sinh(x)/x), the dimensionless cell energy.
double energy_kernel(double x) {
  const double ax = std::abs(x);
  if (ax < kSeriesLimit) return ax * ax * langevin_series_over_x(ax * ax) - log_sinhc_series(ax * ax);
  return ax * langevin(ax) - log_sinhc(ax);
}

}  // namespace

double langevin(double x) {
  const double ax = std::abs(x);
  double value;
  if (ax < kSeriesLimit) {
    value = ax * langevin_series_over_x(ax * ax);
  } else {
    value = 1.0 / std::tanh(ax) - 1.0 / ax;
  }
  return std::copysign(value, x);
}

double langevin_derivative(double x) {
  const double ax = std::abs(x);
  if (ax < kSeriesLimit) return langevin_slope_series(ax * ax);
  if (ax > 300.0) return 1.0 / (ax * ax);
  const double s = std::sinh(ax);
  return 1.0 / (ax * ax) - 1.0 / (s * s);
}

double log_sinhc(double x) {
  const double ax = std::abs(x);
  if (ax < kSeriesLimit) return log_sinhc_series(ax * ax);
  if (ax > 20.0) return ax - std::log(2.0 * ax) + std::log1p(-std::exp(-2.0 * ax));
  return std::log(std::sinh(ax) / ax);
}

AnhystereticCurve::AnhystereticCurve(const AnhystereticParams& params, int lut_samples)
    : params_(params) {
  if (!(params.Ma_T >= 0.0 && params.Mb_T >= 0.0 && params.ha_Apm > 0.0 && params.hb_Apm > 0.0) ||
      params.Ma_T + params.Mb_T <= 0.0) {
    throw InvalidInput("anhysteretic parameters must be positive");
  }
  if (lut_samples < 2) throw InvalidInput("lookup table needs at least 2 samples");
  chi_max_ = (params.Ma_T / params.ha_Apm + params.Mb_T / params.hb_Apm) / (3.0 * kMu0);

  lut_h_.reserve(static_cast<std::size_t>(lut_samples) + 1);
  lut_h_.push_back(0.0);
  const double log_min = std::log10(kLutMinField);
  const double log_max = std::log10(kLutMaxField);
  for (int i = 0; i < lut_samples; ++i) {
    const double t = static_cast<double>(i) / (lut_samples - 1);
    lut_h_.push_back(std::pow(10.0, log_min + t * (log_max - log_min)));
  }
  lut_b_.reserve(lut_h_.size());
  for (double h : lut_h_) lut_b_.push_back(flux_density(h));
  for (std::size_t i = 1; i < lut_b_.size(); ++i) {
    if (!(lut_b_[i] > lut_b_[i - 1])) throw BuildError("anhysteretic lookup table is not monotone");
  }
}

double AnhystereticCurve::magnetization(double h) const {
  return params_.Ma_T * langevin(h / params_.ha_Apm) + params_.Mb_T * langevin(h / params_.hb_Apm);
}

double AnhystereticCurve::magnetization_slope(double h) const {
  return params_.Ma_T * langevin_derivative(h / params_.ha_Apm) / params_.ha_Apm +
         params_.Mb_T * langevin_derivative(h / params_.hb_Apm) / params_.hb_Apm;
}

double AnhystereticCurve::secant_susceptibility(double h) const {
  return params_.Ma_T * langevin_over_x(h / params_.ha_Apm) / params_.ha_Apm +
         params_.Mb_T * langevin_over_x(h / params_.hb_Apm) / params_.hb_Apm;
}

double AnhystereticCurve::cell_energy(double h) const {
  return params_.Ma_T * params_.ha_Apm * energy_kernel(h / params_.ha_Apm) +
         params_.Mb_T * params_.hb_Apm * energy_kernel(h / params_.hb_Apm);
}

Vec2 AnhystereticCurve::magnetization(const Vec2& H) const {
  // M = (|M|/|H|) H keeps the zero-field case finite.
  return secant_susceptibility(H.norm()) * H;
}

Vec2 AnhystereticCurve::flux_density(const Vec2& H) const {
  return kMu0 * H + magnetization(H);
}

AnhystereticEval AnhystereticCurve::eval(const Vec2& H) const {
  if (!H.allFinite()) throw InvalidInput("anhysteretic evaluation: non-finite field");
  const double h = H.norm();
  const double secant = secant_susceptibility(h);
  AnhystereticEval out;
  out.M = secant * H;
  if (h == 0.0) {
    out.dBdH = (kMu0 + secant) * Mat2::Identity();
    return out;
  }
  const Vec2 e = H / h;
  const Mat2 longitudinal = e * e.transpose();
  out.dBdH = kMu0 * Mat2::Identity() + secant * (Mat2::Identity() - longitudinal) +
             magnetization_slope(h) * longitudinal;
  return out;
}

double AnhystereticCurve::invert_magnitude(double b) const {
  if (!std::isfinite(b) || b < 0.0) throw InvalidInput("anhysteretic inverse: invalid |B|");
  if (b == 0.0) return 0.0;
  if (b > lut_b_.back()) {
    throw OutOfRange("anhysteretic inverse: |B| = " + std::to_string(b) +
                     " T exceeds lookup table range " + std::to_string(lut_b_.back()) + " T");
  }
  const auto it = std::upper_bound(lut_b_.begin(), lut_b_.end(), b);
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - lut_b_.begin()),
                                               lut_b_.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (b - lut_b_[lo]) / (lut_b_[hi] - lut_b_[lo]);
  double h = lut_h_[lo] + t * (lut_h_[hi] - lut_h_[lo]);
  // Newton polish on |B_an|(h) = b.
  h -= (flux_density(h) - b) / (kMu0 + magnetization_slope(h));
  return std::max(h, 0.0);
}

Vec2 AnhystereticCurve::invert(const Vec2& B) const {
  if (!B.allFinite()) throw InvalidInput("anhysteretic inverse: non-finite flux density");
  const double b = B.norm();
  if (b == 0.0) return Vec2::Zero();
  return (invert_magnitude(b) / b) * B;
}

}  // namespace hystermag
