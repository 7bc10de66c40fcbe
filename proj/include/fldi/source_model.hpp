#pragma once

// Folded linear displacement interferometer: path trace from pump
// polarization to the emitted two-photon state.
//
// Clockwise arm: the H pump component passes the beam displacer undeviated,
// the 45 deg a-HWP turns it to V, and VV pairs are generated on both crystal
// passes. They return through the displaced lane and leave as VV.
// Counter-clockwise arm: the V pump component is displaced, generates VV pairs
// on both passes, and the pairs are flipped to HH by the a-HWP on the way out.
// Only the V pump component is phase matched (Type-0, z-polarized).
//
// First-pass pairs traverse the corner cube; second-pass pairs do not, and the
// two passes add incoherently (rate weights 1 and pass_gain). The relative
// phase of the output is phi = arg(a_H / a_V) - lcvr_phase, where a is the
// pump Jones vector; the corner cube contributes the same <V|J|V> factor to
// both arms and so adds no differential phase.

#include "fldi/ccr.hpp"
#include "fldi/polarization.hpp"
#include "fldi/two_photon.hpp"

namespace fldi::source {

struct SourceConfig {
  optics::PolarizationState<double> pump_polarization = optics::PolarizationState<double>::diagonal();
  double lcvr_phase_rad = 0.0;
  optics::CcrModel ccr = optics::CcrModel::ideal();
  /// Amplitude leaking through the beam displacer into the wrong output lane.
  double bd_split_ratio_error = 0.0;
  /// Off-diagonal decay at the density-matrix level, in [0, 1].
  double dephasing = 0.0;
  /// Second-pass pair-generation weight relative to the first pass.
  double pass_gain = 1.0;

  void validate() const;
};

struct TraceResult {
  quantum::TwoPhotonState state;
  /// Pair rate into the output port relative to one ideal single pass.
  double relative_pair_rate;
};

TraceResult trace_source(const SourceConfig& config);

/// Normalized output state (pure when dephasing is zero and both passes agree).
quantum::TwoPhotonState trace_paths(const SourceConfig& config);

/// 1 + pass_gain.
double double_pass_rate_gain(double pass_gain);

struct MisalignmentSetting {
  double tip_deg = 0.0;
  double tilt_deg = 0.0;
  double beam_waist_at_coupler_um = 0.0;
  double lever_arm_mm = 10.0;
  bool compensated = false;
  /// Fraction of the lateral offset left after re-peaking the fiber coupler.
  double recovery_factor = 0.2;

  void validate() const;

  /// Defaults with the coupler waist calibrated to the uncompensated anchor.
  static MisalignmentSetting calibrated(double tip_deg = 0.0, double tilt_deg = 0.0, bool compensated = false);
};

/// Sweep edge and retention used to calibrate the coupler waist: at 1 deg the
/// uncompensated coincidences fall to 1.0/2.5 of the optimum.
inline constexpr double kCalibrationEdgeDeg = 1.0;
inline constexpr double kCalibrationCoincidenceRetention = 1.0 / 2.5;

/// Waist giving `retention` relative coincidences at `edge_deg`.
double calibrate_coupler_waist_um(double edge_deg, double lever_arm_mm, double retention);

struct MisalignmentResponse {
  double lateral_offset_mm;
  /// Per-photon Gaussian mode overlap.
  double coupling;
  /// Both photons must couple.
  double relative_coincidences;
  /// C / S_other scales with one photon's coupling.
  double relative_heralding;
};

/// Lateral offset d = 2 * lever_arm * tan(sqrt(tip^2 + tilt^2)), coupling
/// exp(-d^2 / (2 w^2)); compensation scales d by the recovery factor.
double misalignment_coupling(const MisalignmentSetting& setting);
MisalignmentResponse misalignment_response(const MisalignmentSetting& setting);

}  // namespace fldi::source
