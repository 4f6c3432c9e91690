#include "hystermag/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hystermag/errors.hpp"

namespace hystermag {

std::optional<WaveformKind> parse_waveform_kind(std::string_view name) {
  if (name == "zero") return WaveformKind::kZero;
  if (name == "sinusoid") return WaveformKind::kSinusoid;
  if (name == "triangular_pulse") return WaveformKind::kTriangularPulse;
  if (name == "bipolar_pulse") return WaveformKind::kBipolarPulse;
  if (name == "piecewise_linear") return WaveformKind::kPiecewiseLinear;
  return std::nullopt;
}

std::string_view to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::kZero: return "zero";
    case WaveformKind::kSinusoid: return "sinusoid";
    case WaveformKind::kTriangularPulse: return "triangular_pulse";
    case WaveformKind::kBipolarPulse: return "bipolar_pulse";
    case WaveformKind::kPiecewiseLinear: return "piecewise_linear";
  }
  return "unknown";
}

void Waveform::validate() const {
  switch (kind) {
    case WaveformKind::kZero:
      return;
    case WaveformKind::kSinusoid:
      if (!(frequency > 0.0)) throw InvalidInput("sinusoid: frequency must be positive");
      return;
    case WaveformKind::kTriangularPulse:
    case WaveformKind::kBipolarPulse:
      if (!(rise_time > 0.0)) throw InvalidInput("pulse: rise_time must be positive");
      if (!(fall_rate_multiple > 0.0)) throw InvalidInput("pulse: fall_rate_multiple must be positive");
      if (!(repetition_rate > 0.0)) throw InvalidInput("pulse: repetition_rate must be positive");
      if (active_time() > 1.0 / repetition_rate * (1.0 + 1e-12)) {
        throw InvalidInput("pulse: pulse is longer than the repetition period");
      }
      return;
    case WaveformKind::kPiecewiseLinear:
      if (times.empty() || times.size() != values.size()) {
        throw InvalidInput("piecewise_linear: times and values must be non-empty and equal length");
      }
      if (!std::is_sorted(times.begin(), times.end())) {
        throw InvalidInput("piecewise_linear: times must be sorted");
      }
      return;
  }
}

double Waveform::active_time() const {
  switch (kind) {
    case WaveformKind::kTriangularPulse:
      return rise_time * (1.0 + 1.0 / fall_rate_multiple);
    case WaveformKind::kBipolarPulse:
      return rise_time * (1.0 + 1.0 / fall_rate_multiple);
    default:
      return 0.0;
  }
}

double Waveform::period() const {
  switch (kind) {
    case WaveformKind::kSinusoid: return 1.0 / frequency;
    case WaveformKind::kTriangularPulse:
    case WaveformKind::kBipolarPulse: return 1.0 / repetition_rate;
    default: return 0.0;
  }
}

double Waveform::operator()(double t) const {
  switch (kind) {
    case WaveformKind::kZero:
      return 0.0;
    case WaveformKind::kSinusoid:
      return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
    case WaveformKind::kTriangularPulse: {
      const double tau = std::fmod(std::max(t, 0.0), 1.0 / repetition_rate);
      const double fall_time = rise_time / fall_rate_multiple;
      if (tau <= rise_time) return amplitude * tau / rise_time;
      if (tau <= rise_time + fall_time) return amplitude * (1.0 - (tau - rise_time) / fall_time);
      return 0.0;
    }
    case WaveformKind::kBipolarPulse: {
      // Fast segments each cover half the swing of the slow ramp.
      const double tau = std::fmod(std::max(t, 0.0), 1.0 / repetition_rate);
      const double fast = rise_time / (2.0 * fall_rate_multiple);
      if (tau <= fast) return -amplitude * tau / fast;
      if (tau <= fast + rise_time) return amplitude * (-1.0 + 2.0 * (tau - fast) / rise_time);
      if (tau <= 2.0 * fast + rise_time) return amplitude * (1.0 - (tau - fast - rise_time) / fast);
      return 0.0;
    }
    case WaveformKind::kPiecewiseLinear: {
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t hi = static_cast<std::size_t>(it - times.begin());
      const std::size_t lo = hi - 1;
      const double s = (t - times[lo]) / (times[hi] - times[lo]);
      return values[lo] + s * (values[hi] - values[lo]);
    }
  }
  return 0.0;
}

Waveform tabulated(std::vector<double> times, std::vector<double> values) {
  Waveform w;
  w.kind = WaveformKind::kPiecewiseLinear;
  w.times = std::move(times);
  w.values = std::move(values);
  w.validate();
  return w;
}

void CircuitSpec::validate() const {
  if (n_cond < 1) throw InvalidInput("circuit: at least one conductor required");
  if (!resistance.empty()) {
    if (static_cast<int>(resistance.size()) != n_cond) {
      throw InvalidInput("circuit: resistance list does not match conductor count");
    }
    if (drive == DriveMode::kCurrent) {
      for (double r : resistance) {
        if (!(r > 0.0)) throw InvalidInput("circuit: resistances must be positive in current drive");
      }
    }
  }
  if (!orientation.empty() && static_cast<int>(orientation.size()) != n_cond) {
    throw InvalidInput("circuit: orientation list does not match conductor count");
  }
  if (!per_conductor.empty() && static_cast<int>(per_conductor.size()) != n_cond) {
    throw InvalidInput("circuit: per-conductor sources do not match conductor count");
  }
  source.validate();
  for (const auto& w : per_conductor) w.validate();
}

std::vector<double> CircuitSpec::drive_values(double t) const {
  std::vector<double> out(static_cast<std::size_t>(n_cond));
  for (int m = 0; m < n_cond; ++m) {
    const double sign = orientation.empty() ? 1.0 : orientation[static_cast<std::size_t>(m)];
    out[static_cast<std::size_t>(m)] =
        per_conductor.empty() ? sign * source(t) : per_conductor[static_cast<std::size_t>(m)](t);
  }
  return out;
}

}  // namespace hystermag
