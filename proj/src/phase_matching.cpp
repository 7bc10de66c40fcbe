#include "fldi/phase_matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "fldi/csv.hpp"
#include "fldi/errors.hpp"
#include "fldi/units.hpp"

namespace fldi::qpm {

namespace {

constexpr double kTwoPi = 2.0 * units::kPi;

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Bracketed root: bisection until the bracket is narrow, then safeguarded
// secant steps. Returns the abscissa with |f| < tol.
double hybrid_root(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                   const SolverOptions& opts, double switch_width) {
  if (std::abs(fa) < opts.tolerance) return a;
  if (std::abs(fb) < opts.tolerance) return b;
  double best_x = std::abs(fa) < std::abs(fb) ? a : b;
  double best_f = std::min(std::abs(fa), std::abs(fb));
  for (int it = 0; it < opts.max_iterations; ++it) {
    double x;
    if (b - a > switch_width) {
      x = 0.5 * (a + b);
    } else {
      x = b - fb * (b - a) / (fb - fa);
      if (!(x > a && x < b)) x = 0.5 * (a + b);
    }
    const double fx = f(x);
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    }
    if (std::abs(fx) < opts.tolerance) return x;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (!(b > a) || std::nextafter(a, b) >= b) break;
  }
  throw NumericError("phase-match solver did not converge (|dk| = " + fmt(best_f) + " rad/m at " + fmt(best_x) + ")",
                     best_f);
}

}  // namespace

void CrystalSpec::validate() const {
  if (!(poling_period_um > 0) || !std::isfinite(poling_period_um)) throw DomainError("poling period must be > 0");
  if (!(length_mm > 0) || !std::isfinite(length_mm)) throw DomainError("crystal length must be > 0");
  if (!std::isfinite(temperature_c)) throw DomainError("crystal temperature must be finite");
  dispersion.validate();
  if (temperature_c < dispersion.temp_min_c || temperature_c > dispersion.temp_max_c) {
    throw RangeError("crystal temperature " + fmt(temperature_c) + " C outside dispersion validity [" +
                     fmt(dispersion.temp_min_c) + ", " + fmt(dispersion.temp_max_c) + "] C");
  }
}

PhaseMatchPoint::PhaseMatchPoint(double pump_nm, double signal_nm, double idler_nm, double temp_c, double delta_k)
    : pump_nm_(pump_nm), signal_nm_(signal_nm), idler_nm_(idler_nm), temp_c_(temp_c), delta_k_(delta_k) {
  if (!(pump_nm > 0 && signal_nm > 0 && idler_nm > 0)) throw DomainError("wavelengths must be positive");
  if (!(energy_residual() < kEnergyTolerancePerNm)) {
    throw DomainError("energy conservation violated: residual " + fmt(energy_residual()) + " 1/nm");
  }
  if (signal_nm > idler_nm) throw DomainError("signal must be the shorter wavelength");
}

double PhaseMatchPoint::energy_residual() const {
  return std::abs(1.0 / pump_nm_ - 1.0 / signal_nm_ - 1.0 / idler_nm_);
}

double idler_from_energy(double pump_nm, double signal_nm) {
  if (!(pump_nm > 0) || !(signal_nm > pump_nm)) {
    throw DomainError("signal wavelength must exceed pump wavelength");
  }
  return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
}

double delta_k(const CrystalSpec& spec, const WavelengthTriple& w, double temp_c, bool include_grating) {
  const auto& d = spec.dispersion;
  const double kp = kTwoPi * refractive_index(d, w.pump_nm, temp_c) / units::nm_to_m(w.pump_nm);
  const double ks = kTwoPi * refractive_index(d, w.signal_nm, temp_c) / units::nm_to_m(w.signal_nm);
  const double ki = kTwoPi * refractive_index(d, w.idler_nm, temp_c) / units::nm_to_m(w.idler_nm);
  const double grating = include_grating ? kTwoPi / units::um_to_m(spec.poling_period_um) : 0.0;
  return kp - ks - ki - grating;
}

PhaseMatchPoint phase_match_solve(const CrystalSpec& spec, double pump_nm, double temp_c, const SolverOptions& opts) {
  spec.validate();
  const double degenerate = 2.0 * pump_nm;
  const double lo = degenerate * opts.bracket_fraction;
  const double hi = opts.branch == Branch::kDegenerate ? degenerate : degenerate - opts.guard_band_nm;
  if (!(hi > lo)) throw DomainError("empty signal search bracket");
  auto f = [&](double ls) { return delta_k(spec, {pump_nm, ls, idler_from_energy(pump_nm, ls)}, temp_c); };
  const double flo = f(lo);
  const double fhi = f(hi);
  if ((flo < 0) == (fhi < 0) && std::abs(flo) >= opts.tolerance && std::abs(fhi) >= opts.tolerance) {
    throw NoPhaseMatchError("no phase match in range [" + fmt(lo) + ", " + fmt(hi) + "] nm at T = " + fmt(temp_c) +
                                " C",
                            std::min(std::abs(flo), std::abs(fhi)));
  }
  const double ls = hybrid_root(f, lo, hi, flo, fhi, opts, 1e-2);
  // Recompute the idler through the same path so the point is self-consistent.
  const double li = idler_from_energy(pump_nm, ls);
  return PhaseMatchPoint(pump_nm, ls, li, temp_c, f(ls));
}

PhaseMatchPoint phase_match_temperature(const CrystalSpec& spec, double pump_nm, double signal_nm, double temp_lo_c,
                                        double temp_hi_c, const SolverOptions& opts) {
  spec.dispersion.validate();
  if (!(temp_hi_c > temp_lo_c)) throw DomainError("empty temperature bracket");
  const double li = idler_from_energy(pump_nm, signal_nm);
  const WavelengthTriple w{pump_nm, signal_nm, li};
  auto f = [&](double t) { return delta_k(spec, w, t); };
  const double flo = f(temp_lo_c);
  const double fhi = f(temp_hi_c);
  if ((flo < 0) == (fhi < 0) && std::abs(flo) >= opts.tolerance && std::abs(fhi) >= opts.tolerance) {
    throw NoPhaseMatchError("no phase-matching temperature in [" + fmt(temp_lo_c) + ", " + fmt(temp_hi_c) + "] C",
                            std::min(std::abs(flo), std::abs(fhi)));
  }
  const double t = hybrid_root(f, temp_lo_c, temp_hi_c, flo, fhi, opts, 1e-3);
  const double ls = std::min(signal_nm, li);
  const double lb = std::max(signal_nm, li);
  return PhaseMatchPoint(pump_nm, ls, lb, t, f(t));
}

double sinc_squared(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
  const double s = std::sin(x) / x;
  return s * s;
}

std::vector<double> spectral_envelope(const CrystalSpec& spec, double pump_nm, double temp_c,
                                      std::span<const double> signal_grid_nm, const EnvelopeOptions& opts) {
  const double l_eff = units::mm_to_m(spec.length_mm) * (opts.double_pass ? 2.0 : 1.0);
  std::vector<double> offsets{0.0};
  std::vector<double> weights{1.0};
  if (opts.pump_fwhm_nm > 0) {
    const int n = std::max(3, opts.pump_samples | 1);
    const double sigma = opts.pump_fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    offsets.clear();
    weights.clear();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = -3.0 * sigma + 6.0 * sigma * i / (n - 1);
      const double w = std::exp(-0.5 * x * x / (sigma * sigma));
      offsets.push_back(x);
      weights.push_back(w);
      total += w;
    }
    for (auto& w : weights) w /= total;
  }
  std::vector<double> out(signal_grid_nm.size(), 0.0);
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    const double lp = pump_nm + offsets[j];
    for (std::size_t i = 0; i < signal_grid_nm.size(); ++i) {
      const double ls = signal_grid_nm[i];
      const double dk = delta_k(spec, {lp, ls, idler_from_energy(lp, ls)}, temp_c);
      out[i] += weights[j] * sinc_squared(0.5 * dk * l_eff);
    }
  }
  return out;
}

double focal_parameter(double length_mm, double lambda_nm, double index, double waist_um) {
  if (!(length_mm > 0 && lambda_nm > 0 && index > 0 && waist_um > 0)) {
    throw DomainError("focal parameter inputs must all be positive");
  }
  const double k = kTwoPi * index / units::nm_to_m(lambda_nm);
  const double w = units::um_to_m(waist_um);
  return units::mm_to_m(length_mm) / (k * w * w);
}

FocusGeometry::Xi FocusGeometry::focal_parameters(const CrystalSpec& spec, const WavelengthTriple& w,
                                                  double temp_c) const {
  const auto& d = spec.dispersion;
  return {focal_parameter(spec.length_mm, w.pump_nm, refractive_index(d, w.pump_nm, temp_c), waist_pump_um),
          focal_parameter(spec.length_mm, w.signal_nm, refractive_index(d, w.signal_nm, temp_c), waist_signal_um),
          focal_parameter(spec.length_mm, w.idler_nm, refractive_index(d, w.idler_nm, temp_c), waist_idler_um)};
}

namespace {

double integrate_band(const CrystalSpec& spec, double pump_nm, double temp_c, double lo, double hi,
                      const MapOptions& opts) {
  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / opts.resolution_nm)) + 1);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / (n - 1);
  const auto env = spectral_envelope(spec, pump_nm, temp_c, grid, opts.envelope);
  const double h = (hi - lo) / (n - 1);
  double sum = 0.5 * (env.front() + env.back());
  for (int i = 1; i + 1 < n; ++i) sum += env[i];
  return sum * h;
}

}  // namespace

double band_observable(const CrystalSpec& spec, double pump_nm, double temp_c, MapObservable observable,
                       const MapOptions& opts) {
  if (!(opts.band_width_nm > 0) || !(opts.resolution_nm > 0)) throw DomainError("band width and resolution must be > 0");
  const double c = opts.band_center_nm;
  const double band = integrate_band(spec, pump_nm, temp_c, c - 0.5 * opts.band_width_nm, c + 0.5 * opts.band_width_nm,
                                     opts);
  if (observable == MapObservable::kPairRateProxy) return band;
  const double window =
      integrate_band(spec, pump_nm, temp_c, c - opts.window_half_width_nm, c + opts.window_half_width_nm, opts);
  return window > 0 ? band / window : 0.0;
}

PhaseMatchMap phase_match_map(const CrystalSpec& spec, std::span<const double> pump_grid_nm,
                              std::span<const double> temp_grid_c, MapObservable observable, const MapOptions& opts) {
  if (pump_grid_nm.empty() || temp_grid_c.empty()) throw DomainError("phase-match map grids must be non-empty");
  PhaseMatchMap map;
  map.pump_nm.assign(pump_grid_nm.begin(), pump_grid_nm.end());
  map.temp_c.assign(temp_grid_c.begin(), temp_grid_c.end());
  map.values.assign(pump_grid_nm.size() * temp_grid_c.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < pump_grid_nm.size(); ++i) {
    for (std::size_t j = 0; j < temp_grid_c.size(); ++j) {
      try {
        map.values[i * temp_grid_c.size() + j] = band_observable(spec, pump_grid_nm[i], temp_grid_c[j], observable, opts);
      } catch (const std::exception& e) {
        map.cell_errors.push_back("lambda_p=" + fmt(pump_grid_nm[i]) + " T=" + fmt(temp_grid_c[j]) + ": " + e.what());
      }
    }
  }
  return map;
}

std::string PhaseMatchMap::csv() const {
  std::string out = "lambda_p_nm,temp_C,value\n";
  for (std::size_t i = 0; i < pump_nm.size(); ++i) {
    for (std::size_t j = 0; j < temp_c.size(); ++j) {
      out += csv::num(pump_nm[i]) + "," + csv::num(temp_c[j]) + "," + csv::num(at(i, j)) + "\n";
    }
  }
  return out;
}

}  // namespace fldi::qpm
