#pragma once

#include <string_view>
#include <optional>
#include <vector>

namespace hystermag {

enum class WaveformKind { kZero, kSinusoid, kTriangularPulse, kBipolarPulse, kPiecewiseLinear };

std::optional<WaveformKind> parse_waveform_kind(std::string_view name);
std::string_view to_string(WaveformKind kind);

/// Time-dependent source (A for current drive, V for voltage drive).
///
/// Triangular pulse: linear rise 0 -> A over rise_time, linear fall back to
/// zero at fall_rate_multiple times the rise rate, then zero until the next
/// repetition. Bipolar pulse: 0 -> -A at the fast rate, -A -> +A over
/// rise_time, +A -> 0 at the fast rate.
struct Waveform {
  WaveformKind kind = WaveformKind::kZero;
  double amplitude = 0.0;
  double frequency = 0.0;          ///< Hz, sinusoid
  double rise_time = 0.8e-3;       ///< s, pulses
  double fall_rate_multiple = 4.0; ///< fall rate / rise rate
  double repetition_rate = 100.0;  ///< Hz, pulses
  std::vector<double> times;       ///< piecewise-linear samples
  std::vector<double> values;

  void validate() const;
  double operator()(double t) const;

  /// Length of one source cycle in seconds (0 if not periodic).
  double period() const;
  /// Duration of the non-zero part of a pulse.
  double active_time() const;
};

/// Piecewise-linear waveform through the given samples.
Waveform tabulated(std::vector<double> times, std::vector<double> values);

enum class DriveMode { kCurrent, kVoltage };

/// Lumped circuit data of the solid conductors.
struct CircuitSpec {
  int n_cond = 0;
  DriveMode drive = DriveMode::kCurrent;
  /// Per-conductor resistance in ohm (per metre of model length). Empty means
  /// derive R_m = 1/G_m from the geometry.
  std::vector<double> resistance;
  /// Orientation factor of each conductor (+1/-1); all carry the common
  /// source by default.
  std::vector<double> orientation;
  Waveform source;
  /// Optional per-conductor sources overriding `source`.
  std::vector<Waveform> per_conductor;

  void validate() const;
  /// Source value of every conductor at time t.
  std::vector<double> drive_values(double t) const;
};

}  // namespace hystermag
