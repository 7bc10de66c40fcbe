#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fldi/analysis.hpp"
#include "fldi/errors.hpp"
#include "fldi/units.hpp"

namespace fldi::analysis {

std::vector<double> correlation_curve(const quantum::TwoPhotonState& state, double theta1_deg,
                                      std::span<const double> theta2_deg) {
  if (!state.is_normalized(1e-9)) throw DomainError("correlation curve needs a normalized state");
  std::vector<double> out;
  out.reserve(theta2_deg.size());
  for (double t2 : theta2_deg) out.push_back(quantum::projection_probabilities(state, theta1_deg, t2).both);
  return out;
}

VisibilityResult fit_visibility(std::span<const CurveSample> samples, std::string basis_label) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 8) throw DomainError("visibility fit needs at least 8 samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const auto& a, const auto& b) { return a.theta_deg < b.theta_deg; });
  if (hi->theta_deg - lo->theta_deg < 180.0 - 1e-9) throw DomainError("visibility fit samples must span 180 deg");

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.theta_deg) || !std::isfinite(s.counts) || s.counts < 0) {
      throw DomainError("visibility samples must be finite with non-negative counts");
    }
    const double t = units::deg_to_rad(2 * s.theta_deg);
    x.row(i) << 1.0, std::cos(t), std::sin(t);
    y(i) = s.counts;
    w(i) = 1.0 / std::max(s.counts, 1.0);
  }
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  const Eigen::Matrix3d normal = xtw * x;
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw NumericError("visibility fit design matrix is singular", std::numeric_limits<double>::quiet_NaN());
  }
  const Eigen::Vector3d c = ldlt.solve(xtw * y);
  const Eigen::VectorXd r = y - x * c;
  const double chi2 = r.dot(w.asDiagonal() * r);
  const double scale = chi2 / static_cast<double>(n - 3);
  const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity()) * scale;

  VisibilityResult out;
  out.basis_label = std::move(basis_label);
  out.amplitude = 2 * c(0);
  const double mod = std::hypot(c(1), c(2));
  out.phase_offset_deg = units::rad_to_deg(0.5 * std::atan2(c(2), c(1)));
  if (c(0) <= 0) return out;
  const double v = mod / c(0);
  out.visibility = std::clamp(v, 0.0, 1.0);
  if (mod > 0) {
    const Eigen::Vector3d grad(-v / c(0), c(1) / (mod * c(0)), c(2) / (mod * c(0)));
    out.uncertainty = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  } else {
    out.uncertainty = std::sqrt(std::max(0.0, cov(1, 1) + cov(2, 2))) / c(0);
  }
  return out;
}

double dephasing_for_visibility(double target, double ceiling) {
  if (!(ceiling > 0 && ceiling <= 1)) throw DomainError("visibility ceiling must lie in (0, 1]");
  if (!(target >= 0 && target <= ceiling)) throw DomainError("target visibility must lie in [0, ceiling]");
  return 1.0 - target / ceiling;
}

double calibrated_dephasing(double ceiling) {
  return dephasing_for_visibility(0.5 * (kReferenceVisibilities[2] + kReferenceVisibilities[3]), ceiling);
}

Estimate fidelity_from_visibilities(const std::array<double, 4>& v, const std::array<double, 4>& sigma) {
  double sum = 0, var = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(v[k] >= 0 && v[k] <= 1)) throw DomainError("visibilities must lie in [0, 1]");
    if (!(sigma[k] >= 0)) throw DomainError("visibility uncertainties must be non-negative");
    sum += v[k];
    var += sigma[k] * sigma[k];
  }
  return {sum / 4, std::sqrt(var) / 4};
}

double qber_estimate(double fidelity, QberConvention convention) {
  if (!(fidelity >= 0 && fidelity <= 1)) throw DomainError("fidelity must lie in [0, 1]");
  return convention == QberConvention::kOneMinusFidelity ? 1 - fidelity : (1 - fidelity) / 2;
}

}  // namespace fldi::analysis
