#include "fldi/two_photon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "fldi/csv.hpp"
#include "fldi/errors.hpp"

namespace fldi::quantum {

namespace {
const char* kBasisNames[4] = {"HH", "HV", "VH", "VV"};
}

TwoPhotonState TwoPhotonState::pure(const Amplitudes& amplitudes) {
  return TwoPhotonState(true, amplitudes, amplitudes * amplitudes.adjoint());
}

TwoPhotonState TwoPhotonState::mixed(const DensityMatrix& rho) {
  if (!rho.allFinite()) throw DomainError("density matrix must be finite");
  if ((rho - rho.adjoint()).norm() > 1e-12 * std::max(1.0, rho.norm())) {
    throw DomainError("density matrix must be Hermitian");
  }
  return TwoPhotonState(false, Amplitudes::Zero(), rho);
}

const Amplitudes& TwoPhotonState::amplitudes() const {
  if (!pure_) throw DomainError("state is mixed; no amplitude vector");
  return amps_;
}

DensityMatrix TwoPhotonState::density() const { return rho_; }

double TwoPhotonState::trace() const { return rho_.trace().real(); }

bool TwoPhotonState::is_normalized(double tol) const { return std::abs(trace() - 1.0) <= tol; }

TwoPhotonState TwoPhotonState::normalized() const {
  const double t = trace();
  if (!(t > 0)) throw DomainError("cannot normalize a zero two-photon state");
  if (pure_) return pure(amps_ / std::sqrt(t));
  return mixed(rho_ / t);
}

std::string TwoPhotonState::csv() const {
  std::string out;
  if (pure_) {
    out = "basis,re,im\n";
    for (int i = 0; i < 4; ++i) {
      out += std::string(kBasisNames[i]) + "," + csv::num(amps_(i).real()) + "," + csv::num(amps_(i).imag()) + "\n";
    }
    return out;
  }
  out = "row,col,re,im\n";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out += std::string(kBasisNames[r]) + "," + kBasisNames[c] + "," + csv::num(rho_(r, c).real()) + "," +
             csv::num(rho_(r, c).imag()) + "\n";
    }
  }
  return out;
}

TwoPhotonState bell_phi(double phi_rad) {
  Amplitudes a = Amplitudes::Zero();
  a(kHH) = 1.0 / std::sqrt(2.0);
  a(kVV) = std::polar(1.0 / std::sqrt(2.0), phi_rad);
  return TwoPhotonState::pure(a);
}

TwoPhotonState phi_plus() { return bell_phi(0.0); }
TwoPhotonState phi_minus() { return bell_phi(units::kPi); }

TwoPhotonState maximally_mixed() { return TwoPhotonState::mixed(DensityMatrix::Identity() / 4.0); }

double fidelity(const TwoPhotonState& state, const TwoPhotonState& target) {
  if (!target.is_pure()) throw DomainError("fidelity target must be a pure state");
  if (!state.is_normalized() || !target.is_normalized()) throw DomainError("fidelity inputs must be normalized");
  const Amplitudes& t = target.amplitudes();
  if (state.is_pure()) return std::norm(t.dot(state.amplitudes()));
  const double f = (t.adjoint() * state.density() * t)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

TwoPhotonState apply_dephasing(const TwoPhotonState& state, double dephasing) {
  if (!(dephasing >= 0.0 && dephasing <= 1.0)) throw DomainError("dephasing must lie in [0, 1]");
  if (dephasing == 0.0) return state;
  DensityMatrix rho = state.density();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r != c) rho(r, c) *= (1.0 - dephasing);
    }
  }
  return TwoPhotonState::mixed(rho);
}

double relative_phase(const TwoPhotonState& state) {
  if (state.is_pure()) {
    const auto& a = state.amplitudes();
    return std::arg(a(kVV) * std::conj(a(kHH)));
  }
  return std::arg(state.density()(kVV, kHH));
}

Eigen::Matrix4cd kron(const optics::JonesMatrix<double>& a, const optics::JonesMatrix<double>& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Amplitudes kron(const optics::JonesVector<double>& a, const optics::JonesVector<double>& b) {
  Amplitudes out;
  out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return out;
}

ProjectionProbabilities projection_probabilities(const TwoPhotonState& state, double signal_deg, double idler_deg) {
  const auto p1 = optics::linear_polarizer<double>(signal_deg).matrix();
  const auto p2 = optics::linear_polarizer<double>(idler_deg).matrix();
  const optics::JonesMatrix<double> id = optics::JonesMatrix<double>::Identity();
  const DensityMatrix rho = state.density();
  const double t = rho.trace().real();
  const auto expect = [&](const Eigen::Matrix4cd& op) { return std::clamp((rho * op).trace().real() / t, 0.0, 1.0); };
  return {expect(kron(p1, p2)), expect(kron(p1, id)), expect(kron(id, p2))};
}

bool is_physical(const TwoPhotonState& state, double tol) {
  const DensityMatrix rho = state.density();
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(rho.trace().real() - 1.0) > tol) return false;
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace fldi::quantum
