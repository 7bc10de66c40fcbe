#pragma once

// Type-0 quasi-phase matching: wavevector mismatch, solvers, spectral
// envelopes and (lambda_p, T) maps. Public API in nm / um / mm / degC;
// everything is converted to meters internally.

#include <span>
#include <string>
#include <vector>

#include "fldi/dispersion.hpp"

namespace fldi::qpm {

struct CrystalSpec {
  double poling_period_um = 3.425;
  double length_mm = 10.0;
  double temperature_c = 25.0;
  DispersionModel dispersion = DispersionModel::ktp_z();

  void validate() const;
};

struct WavelengthTriple {
  double pump_nm;
  double signal_nm;
  double idler_nm;
};

/// A solved point. Energy conservation and signal <= idler are enforced here.
class PhaseMatchPoint {
 public:
  PhaseMatchPoint(double pump_nm, double signal_nm, double idler_nm, double temp_c, double delta_k);

  double pump_nm() const { return pump_nm_; }
  double signal_nm() const { return signal_nm_; }
  double idler_nm() const { return idler_nm_; }
  double temperature_c() const { return temp_c_; }
  double delta_k() const { return delta_k_; }
  WavelengthTriple triple() const { return {pump_nm_, signal_nm_, idler_nm_}; }

  /// |1/lp - 1/ls - 1/li| in 1/nm.
  double energy_residual() const;

 private:
  double pump_nm_, signal_nm_, idler_nm_, temp_c_, delta_k_;
};

inline constexpr double kEnergyTolerancePerNm = 1e-9;

/// 1/li = 1/lp - 1/ls. Throws DomainError unless signal > pump.
double idler_from_energy(double pump_nm, double signal_nm);

/// Wavevector mismatch in rad/m. `include_grating = false` drops the 2*pi/Lambda
/// term (the unpoled limit).
double delta_k(const CrystalSpec& spec, const WavelengthTriple& w, double temp_c, bool include_grating = true);

enum class Branch { kNonDegenerate, kDegenerate };

struct SolverOptions {
  double tolerance = 1e-3;  // rad/m
  int max_iterations = 200;
  double guard_band_nm = 5.0;
  /// Lower edge of the signal bracket as a fraction of 2*lp.
  double bracket_fraction = 0.8;
  Branch branch = Branch::kNonDegenerate;
};

/// Solves for the signal wavelength at fixed (lp, T), idler slaved to energy
/// conservation. Bracket: [2*lp*fraction, 2*lp - guard]. kDegenerate includes
/// the degenerate point itself as the upper end.
PhaseMatchPoint phase_match_solve(const CrystalSpec& spec, double pump_nm, double temp_c,
                                  const SolverOptions& opts = {});

/// Crystal temperature at which (lp, ls, li) is phase matched, searched in
/// [temp_lo, temp_hi].
PhaseMatchPoint phase_match_temperature(const CrystalSpec& spec, double pump_nm, double signal_nm, double temp_lo_c,
                                        double temp_hi_c, const SolverOptions& opts = {});

struct EnvelopeOptions {
  /// L_eff = 2L when set.
  bool double_pass = false;
  /// Gaussian pump FWHM; 0 disables the pump-bandwidth average.
  double pump_fwhm_nm = 0.0;
  int pump_samples = 15;
};

/// sinc^2(dk * L_eff / 2) per signal wavelength; peak value 1 at dk = 0.
std::vector<double> spectral_envelope(const CrystalSpec& spec, double pump_nm, double temp_c,
                                      std::span<const double> signal_grid_nm, const EnvelopeOptions& opts = {});

double sinc_squared(double x);

/// xi = L / (k w^2), k = 2 pi n / lambda.
double focal_parameter(double length_mm, double lambda_nm, double index, double waist_um);

struct FocusGeometry {
  double waist_pump_um;
  double waist_signal_um;
  double waist_idler_um;

  struct Xi {
    double pump, signal, idler;
  };
  Xi focal_parameters(const CrystalSpec& spec, const WavelengthTriple& w, double temp_c) const;
};

enum class MapObservable { kPairRateProxy, kHeraldingProxy };

struct MapOptions {
  double band_center_nm = 780.0;
  double band_width_nm = 10.0;
  /// Half-width of the window used as the heralding denominator.
  double window_half_width_nm = 40.0;
  double resolution_nm = 0.05;
  EnvelopeOptions envelope;
};

struct PhaseMatchMap {
  std::vector<double> pump_nm;
  std::vector<double> temp_c;
  /// Row-major: index = i_pump * temp_c.size() + i_temp. NaN where a cell failed.
  std::vector<double> values;
  std::vector<std::string> cell_errors;

  double at(std::size_t i_pump, std::size_t i_temp) const { return values[i_pump * temp_c.size() + i_temp]; }
  std::string csv() const;
};

/// Pair-rate proxy: envelope integrated over the signal band. Heralding proxy:
/// band integral divided by the integral over the +-window around the band
/// centre (fraction of unfiltered-arm photons whose partner passes the filter).
double band_observable(const CrystalSpec& spec, double pump_nm, double temp_c, MapObservable observable,
                       const MapOptions& opts = {});

PhaseMatchMap phase_match_map(const CrystalSpec& spec, std::span<const double> pump_grid_nm,
                              std::span<const double> temp_grid_c, MapObservable observable,
                              const MapOptions& opts = {});

}  // namespace fldi::qpm
