#pragma once

// Two-photon polarization states over the ordered basis (HH, HV, VH, VV),
// signal photon first.

#include <string>

#include <Eigen/Core>

#include "fldi/polarization.hpp"

namespace fldi::quantum {

using Amplitudes = Eigen::Vector4cd;
using DensityMatrix = Eigen::Matrix4cd;

enum BasisIndex : int { kHH = 0, kHV = 1, kVH = 2, kVV = 3 };

class TwoPhotonState {
 public:
  static TwoPhotonState pure(const Amplitudes& amplitudes);
  static TwoPhotonState mixed(const DensityMatrix& rho);

  bool is_pure() const { return pure_; }
  /// Throws DomainError for a mixed state.
  const Amplitudes& amplitudes() const;
  DensityMatrix density() const;

  double trace() const;
  bool is_normalized(double tol = 1e-9) const;
  TwoPhotonState normalized() const;

  /// `basis,re,im` for pure states, `row,col,re,im` (row-major) otherwise.
  std::string csv() const;

 private:
  TwoPhotonState(bool pure, const Amplitudes& a, const DensityMatrix& rho) : pure_(pure), amps_(a), rho_(rho) {}

  bool pure_;
  Amplitudes amps_;
  DensityMatrix rho_;
};

/// (|HH> + e^{i phi} |VV>) / sqrt(2)
TwoPhotonState bell_phi(double phi_rad);
TwoPhotonState phi_plus();
TwoPhotonState phi_minus();
TwoPhotonState maximally_mixed();

/// <t|rho|t>; `target` must be pure and both must be normalized.
double fidelity(const TwoPhotonState& state, const TwoPhotonState& target);

/// Multiplies every off-diagonal element by (1 - dephasing).
TwoPhotonState apply_dephasing(const TwoPhotonState& state, double dephasing);

/// arg(c_VV / c_HH), or of rho(VV, HH) for mixed states.
double relative_phase(const TwoPhotonState& state);

Eigen::Matrix4cd kron(const optics::JonesMatrix<double>& a, const optics::JonesMatrix<double>& b);
Amplitudes kron(const optics::JonesVector<double>& a, const optics::JonesVector<double>& b);

struct ProjectionProbabilities {
  double both;
  double signal;
  double idler;
};

/// Probabilities that linear polarizers at (signal_deg, idler_deg) pass both
/// photons, and each photon on its own.
ProjectionProbabilities projection_probabilities(const TwoPhotonState& state, double signal_deg, double idler_deg);

/// Hermitian, unit trace, eigenvalues >= -tol.
bool is_physical(const TwoPhotonState& state, double tol = 1e-10);

}  // namespace fldi::quantum
