#pragma once

// Figures of merit from rate data: polarization-correlation fringes and
// visibilities, fidelity / QBER estimators, Allan deviation, and the two
// empirical power-scaling fit families.

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fldi/two_photon.hpp"

namespace fldi::analysis {

// ---- visibility -----------------------------------------------------------

/// Measured H, V, D, A visibilities of the reference source.
inline constexpr std::array<double, 4> kReferenceVisibilities{0.988, 0.970, 0.893, 0.912};
/// Fixed signal polarizer angles for the H, V, D, A fringes.
inline constexpr std::array<double, 4> kBasisAngles{0.0, 90.0, 45.0, 135.0};
inline constexpr std::array<const char*, 4> kBasisLabels{"H", "V", "D", "A"};

/// <psi| (P_theta1 (x) P_theta2) |psi> per idler angle (trace form when mixed).
std::vector<double> correlation_curve(const quantum::TwoPhotonState& state, double theta1_deg,
                                      std::span<const double> theta2_deg);

struct CurveSample {
  double theta_deg;
  double counts;
};

struct VisibilityResult {
  std::string basis_label;
  double visibility = 0;
  double phase_offset_deg = 0;
  /// Peak-to-trough scale A of A (1 + V cos 2(theta - theta0)) / 2 with the floor folded in.
  double amplitude = 0;
  double uncertainty = 0;
};

/// Weighted linear least squares on c0 + c1 cos 2theta + c2 sin 2theta,
/// V = sqrt(c1^2 + c2^2) / c0. Weights 1 / max(y, 1) (Poisson counts;
/// uniform for normalized fractions). Covariance scaled by the reduced chi^2.
/// Needs >= 8 samples spanning >= 180 deg.
VisibilityResult fit_visibility(std::span<const CurveSample> samples, std::string basis_label = {});

/// Off-diagonal decay that brings the D/A visibility to `target` when the
/// detection chain alone caps visibility at `ceiling`.
double dephasing_for_visibility(double target, double ceiling = 1.0);

/// Calibrated against the mean of the reference D and A visibilities.
double calibrated_dephasing(double ceiling = 1.0);

struct Estimate {
  double value;
  double uncertainty;
};

/// Mean of the four linear-basis visibilities; uncertainty in quadrature.
Estimate fidelity_from_visibilities(const std::array<double, 4>& v, const std::array<double, 4>& sigma = {});

enum class QberConvention {
  kOneMinusFidelity,
  /// (1 - V) / 2 with the argument read as a mean visibility.
  kHalfVisibilityLoss,
};

double qber_estimate(double fidelity, QberConvention convention = QberConvention::kOneMinusFidelity);

// ---- Allan deviation ------------------------------------------------------

struct TimeSeries {
  std::vector<double> samples;
  double interval_s = 0;

  std::size_t n_total() const { return samples.size(); }
  void validate() const;
};

struct AllanPoint {
  std::size_t factor = 0;  // N
  double averaging_time_s = 0;
  double sigma = 0;
  /// Number of squared differences entering the average.
  std::size_t n_samples = 0;
  bool valid = true;
  std::string error;
};

struct AllanCurve {
  std::vector<AllanPoint> points;
  std::string csv() const;
};

/// Overlapping block-average two-sample deviation at each averaging factor.
/// Factors with 2N > N_tot are returned flagged invalid.
AllanCurve allan_deviation(const TimeSeries& series, std::span<const std::size_t> factors);

/// Roughly `per_decade` log-spaced factors in [1, N_tot / 2].
std::vector<std::size_t> log_spaced_factors(std::size_t n_total, int per_decade = 10);

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  std::size_t points_used = 0;
  std::vector<std::string> warnings;
};

/// OLS on (log T, log sigma). Non-positive or invalid points are skipped with a warning.
SlopeFit loglog_slope(const AllanCurve& curve);
SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y);

// ---- power-scaling fits ---------------------------------------------------

enum class PowerModel {
  kLogForm,      // y = a log(b P + c)
  kInverseForm,  // y = a + 1 / (P + b)
};

std::string_view to_string(PowerModel model);

struct FitResult {
  PowerModel model = PowerModel::kLogForm;
  std::vector<double> parameters;
  /// Infinite for parameters the data cannot resolve.
  std::vector<double> uncertainties;
  Eigen::MatrixXd covariance;
  double residual_norm = 0;
  double gradient_norm = 0;
  bool converged = false;
  int iterations = 0;

  double operator()(double p) const;
  std::string report() const;
};

double evaluate_power_model(PowerModel model, std::span<const double> params, double p);

/// Simplex descent from 8 deterministic starts, then a Gauss-Newton polish.
/// Needs >= 4 points with P > 0, not all equal.
FitResult fit_power_model(std::span<const double> p, std::span<const double> y, PowerModel model);

}  // namespace fldi::analysis
