#pragma once

// Jones calculus in the lab {H, V} basis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include <Eigen/Core>

#include "fldi/errors.hpp"
#include "fldi/units.hpp"

namespace fldi::optics {

template <typename Scalar>
using JonesVector = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

template <typename Scalar>
using JonesMatrix = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
struct Stokes {
  Scalar s0 = 0;
  Scalar s1 = 0;
  Scalar s2 = 0;
  Scalar s3 = 0;
};

template <typename Scalar = double>
class PolarizationState {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = JonesVector<Scalar>;

  PolarizationState() : c_(Vector(Complex(1), Complex(0))) {}
  explicit PolarizationState(const Vector& components) : c_(components) {}
  PolarizationState(Complex c_h, Complex c_v) : c_(c_h, c_v) {}

  /// Linear polarization at `angle_deg` from H towards V.
  static PolarizationState linear(Scalar angle_deg) {
    const Scalar a = static_cast<Scalar>(units::deg_to_rad(angle_deg));
    return PolarizationState(Complex(std::cos(a)), Complex(std::sin(a)));
  }
  static PolarizationState horizontal() { return linear(0); }
  static PolarizationState vertical() { return linear(90); }
  static PolarizationState diagonal() { return linear(45); }
  static PolarizationState antidiagonal() { return linear(-45); }
  static PolarizationState right_circular() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    return PolarizationState(Complex(r), Complex(0, r));
  }

  const Vector& components() const { return c_; }
  Complex h() const { return c_(0); }
  Complex v() const { return c_(1); }

  Scalar power() const { return c_.squaredNorm(); }

  PolarizationState normalized() const {
    const Scalar n = c_.norm();
    if (!(n > 0)) throw DomainError("cannot normalize a zero polarization state");
    return PolarizationState(Vector(c_ / n));
  }

  Stokes<Scalar> stokes() const {
    const Complex cross = std::conj(c_(0)) * c_(1);
    return {std::norm(c_(0)) + std::norm(c_(1)), std::norm(c_(0)) - std::norm(c_(1)),
            Scalar(2) * cross.real(), Scalar(2) * cross.imag()};
  }

  /// Orientation of the polarization ellipse major axis, degrees in (-90, 90].
  Scalar orientation_deg() const {
    const auto s = stokes();
    Scalar deg = static_cast<Scalar>(units::rad_to_deg(0.5 * std::atan2(s.s2, s.s1)));
    if (deg <= Scalar(-90)) deg += Scalar(180);
    return deg;
  }

  /// Ellipticity angle chi = asin(S3/S0)/2, degrees in [-45, 45].
  Scalar ellipticity_deg() const {
    const auto s = stokes();
    if (!(s.s0 > 0)) return 0;
    const Scalar ratio = std::clamp(s.s3 / s.s0, Scalar(-1), Scalar(1));
    return static_cast<Scalar>(units::rad_to_deg(0.5 * std::asin(ratio)));
  }

 private:
  Vector c_;
};

/// |<a|b>| / (|a| |b|); 1 means equal up to global phase.
template <typename Scalar>
Scalar overlap_magnitude(const PolarizationState<Scalar>& a, const PolarizationState<Scalar>& b) {
  const Scalar na = a.components().norm();
  const Scalar nb = b.components().norm();
  if (!(na > 0) || !(nb > 0)) return 0;
  return std::abs(a.components().dot(b.components())) / (na * nb);
}

template <typename Scalar = double>
class PolarizationOperator {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = JonesMatrix<Scalar>;

  PolarizationOperator() : m_(Matrix::Identity()) {}
  explicit PolarizationOperator(const Matrix& m) : m_(m) {}

  const Matrix& matrix() const { return m_; }

  PolarizationState<Scalar> apply(const PolarizationState<Scalar>& in) const {
    return PolarizationState<Scalar>(typename PolarizationState<Scalar>::Vector(m_ * in.components()));
  }
  PolarizationState<Scalar> operator()(const PolarizationState<Scalar>& in) const { return apply(in); }

  /// Composition: (a * b) applies b first.
  friend PolarizationOperator operator*(const PolarizationOperator& a, const PolarizationOperator& b) {
    return PolarizationOperator(Matrix(a.m_ * b.m_));
  }

  bool is_unitary(Scalar tol) const {
    return ((m_.adjoint() * m_) - Matrix::Identity()).cwiseAbs().maxCoeff() <= tol;
  }

  /// Largest singular value, i.e. maximum power transmission over input states.
  Scalar max_transmission() const {
    const Matrix g = m_.adjoint() * m_;
    const Scalar tr = std::real(g(0, 0) + g(1, 1));
    const Scalar det = std::real(g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0));
    const Scalar disc = std::sqrt(std::max(Scalar(0), tr * tr / 4 - det));
    return tr / 2 + disc;
  }

  Scalar min_transmission() const {
    const Matrix g = m_.adjoint() * m_;
    const Scalar tr = std::real(g(0, 0) + g(1, 1));
    const Scalar det = std::real(g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0));
    const Scalar disc = std::sqrt(std::max(Scalar(0), tr * tr / 4 - det));
    return std::max(Scalar(0), tr / 2 - disc);
  }

 private:
  Matrix m_;
};

namespace detail {
template <typename Scalar>
void require_finite(Scalar x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}
}  // namespace detail

/// Half-wave plate with fast axis at `fast_axis_deg`. Maps linear alpha to 2*theta - alpha.
template <typename Scalar = double>
PolarizationOperator<Scalar> half_wave_plate(std::type_identity_t<Scalar> fast_axis_deg) {
  detail::require_finite(fast_axis_deg, "fast axis angle");
  const Scalar t = static_cast<Scalar>(units::deg_to_rad(2 * fast_axis_deg));
  JonesMatrix<Scalar> m;
  m << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
  return PolarizationOperator<Scalar>(m);
}

/// Rank-1 projector onto linear polarization at `transmission_deg`.
template <typename Scalar = double>
PolarizationOperator<Scalar> linear_polarizer(std::type_identity_t<Scalar> transmission_deg) {
  detail::require_finite(transmission_deg, "transmission angle");
  const Scalar a = static_cast<Scalar>(units::deg_to_rad(transmission_deg));
  const Scalar c = std::cos(a), s = std::sin(a);
  JonesMatrix<Scalar> m;
  m << c * c, c * s, c * s, s * s;
  return PolarizationOperator<Scalar>(m);
}

/// diag(1, exp(i * retardance)).
template <typename Scalar = double>
PolarizationOperator<Scalar> variable_retarder(std::type_identity_t<Scalar> retardance_rad) {
  detail::require_finite(retardance_rad, "retardance");
  JonesMatrix<Scalar> m = JonesMatrix<Scalar>::Identity();
  m(1, 1) = std::polar(Scalar(1), retardance_rad);
  return PolarizationOperator<Scalar>(m);
}

/// Active rotation of the polarization by `angle_deg`.
template <typename Scalar = double>
PolarizationOperator<Scalar> rotator(std::type_identity_t<Scalar> angle_deg) {
  detail::require_finite(angle_deg, "rotation angle");
  const Scalar a = static_cast<Scalar>(units::deg_to_rad(angle_deg));
  JonesMatrix<Scalar> m;
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return PolarizationOperator<Scalar>(m);
}

}  // namespace fldi::optics
