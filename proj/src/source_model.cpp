#include "fldi/source_model.hpp"

#include <cmath>

#include "fldi/errors.hpp"

namespace fldi::source {

namespace {

using optics::JonesMatrix;
using optics::JonesVector;
using quantum::Amplitudes;
using quantum::DensityMatrix;

JonesMatrix<double> lane_filter(double pass_h, double pass_v) {
  JonesMatrix<double> m = JonesMatrix<double>::Zero();
  m(0, 0) = pass_h;
  m(1, 1) = pass_v;
  return m;
}

}  // namespace

void SourceConfig::validate() const {
  if (!(pump_polarization.power() > 0)) throw DomainError("pump polarization has zero power");
  if (!std::isfinite(lcvr_phase_rad)) throw DomainError("LCVR phase must be finite");
  if (!(dephasing >= 0.0 && dephasing <= 1.0)) throw DomainError("dephasing must lie in [0, 1]");
  if (!(pass_gain >= 0.0) || !std::isfinite(pass_gain)) throw DomainError("pass_gain must be >= 0");
  if (!(bd_split_ratio_error >= 0.0 && bd_split_ratio_error <= 1.0)) {
    throw DomainError("bd_split_ratio_error must lie in [0, 1]");
  }
  ccr.validate();
}

TraceResult trace_source(const SourceConfig& config) {
  config.validate();
  const auto pump = optics::variable_retarder<double>(config.lcvr_phase_rad).apply(config.pump_polarization.normalized());
  const std::complex<double> a_h = pump.h();
  const std::complex<double> a_v = pump.v();

  const JonesMatrix<double> ccr = optics::ccr_reflect(config.ccr).matrix();
  // Counter-clockwise light crosses the cube in the reverse direction.
  const JonesMatrix<double> ccr_reverse = ccr.transpose();
  const JonesMatrix<double> hwp = optics::half_wave_plate<double>(45.0).matrix();
  const double eps = config.bd_split_ratio_error;
  const JonesMatrix<double> straight_out = lane_filter(1.0, eps);
  const JonesMatrix<double> displaced_out = lane_filter(eps, 1.0);
  const JonesVector<double> v(0.0, 1.0);
  const JonesVector<double> h(1.0, 0.0);

  // First pass: pairs cross the cube, then the exit filter of their lane.
  const JonesVector<double> u_cw = displaced_out * ccr * v;
  const JonesVector<double> u_ccw = straight_out * hwp * ccr_reverse * v;
  const Amplitudes first = a_h * quantum::kron(u_cw, u_cw) + a_v * quantum::kron(u_ccw, u_ccw);

  // Second pass: the returning pump's V component drives generation.
  const std::complex<double> pump_return_cw = ccr(1, 1);
  const std::complex<double> pump_return_ccw = ccr_reverse(1, 1);
  const JonesVector<double> s_cw = displaced_out * v;
  const JonesVector<double> s_ccw = straight_out * hwp * v;
  const Amplitudes second = a_h * pump_return_cw * quantum::kron(s_cw, s_cw) +
                            a_v * pump_return_ccw * quantum::kron(s_ccw, s_ccw);

  const double w1 = first.squaredNorm();
  const double w2 = config.pass_gain * second.squaredNorm();
  const double total = w1 + w2;
  if (!(total > 1e-300)) throw DomainError("degenerate source configuration: no pairs reach the output");

  const bool parallel = w1 == 0.0 || w2 == 0.0 ||
                        std::abs(std::abs(first.dot(second)) - first.norm() * second.norm()) <=
                            1e-12 * first.norm() * second.norm();
  quantum::TwoPhotonState state = quantum::TwoPhotonState::pure(Amplitudes::Zero());
  if (parallel) {
    const Amplitudes psi = w1 > 0.0 ? first : second;
    state = quantum::TwoPhotonState::pure(psi / psi.norm());
  } else {
    const DensityMatrix rho = first * first.adjoint() + config.pass_gain * second * second.adjoint();
    state = quantum::TwoPhotonState::mixed(rho / total);
  }
  state = quantum::apply_dephasing(state, config.dephasing);
  return {state, total};
}

quantum::TwoPhotonState trace_paths(const SourceConfig& config) { return trace_source(config).state; }

double double_pass_rate_gain(double pass_gain) {
  if (!(pass_gain >= 0.0)) throw DomainError("pass_gain must be >= 0");
  return 1.0 + pass_gain;
}

void MisalignmentSetting::validate() const {
  if (!std::isfinite(tip_deg) || !std::isfinite(tilt_deg)) throw DomainError("tip/tilt must be finite");
  if (!(beam_waist_at_coupler_um > 0)) throw DomainError("coupler beam waist must be > 0");
  if (!(lever_arm_mm > 0)) throw DomainError("lever arm must be > 0");
  if (!(recovery_factor >= 0.0 && recovery_factor <= 1.0)) throw DomainError("recovery factor must lie in [0, 1]");
}

double calibrate_coupler_waist_um(double edge_deg, double lever_arm_mm, double retention) {
  if (!(edge_deg > 0 && lever_arm_mm > 0 && retention > 0 && retention < 1)) {
    throw DomainError("calibration inputs out of range");
  }
  const double d_um = 2.0 * lever_arm_mm * 1e3 * std::tan(units::deg_to_rad(edge_deg));
  // retention = coupling^2 = exp(-d^2 / w^2)
  return d_um / std::sqrt(-std::log(retention));
}

MisalignmentSetting MisalignmentSetting::calibrated(double tip_deg, double tilt_deg, bool compensated) {
  MisalignmentSetting s;
  s.tip_deg = tip_deg;
  s.tilt_deg = tilt_deg;
  s.compensated = compensated;
  s.beam_waist_at_coupler_um =
      calibrate_coupler_waist_um(kCalibrationEdgeDeg, s.lever_arm_mm, kCalibrationCoincidenceRetention);
  return s;
}

MisalignmentResponse misalignment_response(const MisalignmentSetting& setting) {
  setting.validate();
  const double angle = units::deg_to_rad(std::hypot(setting.tip_deg, setting.tilt_deg));
  double d_mm = 2.0 * setting.lever_arm_mm * std::tan(angle);
  if (setting.compensated) d_mm *= setting.recovery_factor;
  const double w_mm = setting.beam_waist_at_coupler_um * 1e-3;
  const double eta = std::exp(-d_mm * d_mm / (2.0 * w_mm * w_mm));
  return {d_mm, eta, eta * eta, eta};
}

double misalignment_coupling(const MisalignmentSetting& setting) { return misalignment_response(setting).coupling; }

}  // namespace fldi::source
