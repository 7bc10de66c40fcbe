#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include "fldi/errors.hpp"
#include "fldi/units.hpp"

namespace fldi::optics {

/// Amplitude reflection coefficients for the s and p components.
///
/// Sign convention: the p coefficient is referred to the mirror image of the
/// incident p unit vector, so r_s == r_p at normal incidence and a perfect
/// conductor gives r_s == r_p == -1. Complex indices use n + i*kappa with
/// kappa >= 0 for absorption.
template <typename Scalar>
struct FresnelCoefficients {
  std::complex<Scalar> r_s;
  std::complex<Scalar> r_p;

  Scalar reflectance_s() const { return std::norm(r_s); }
  Scalar reflectance_p() const { return std::norm(r_p); }
  /// arg(r_p) - arg(r_s), wrapped to (-pi, pi].
  Scalar retardance() const { return std::arg(r_p * std::conj(r_s)); }
};

template <typename Scalar = double>
FresnelCoefficients<Scalar> fresnel_reflection(std::type_identity_t<Scalar> incidence_deg,
                                               std::type_identity_t<std::complex<Scalar>> n1,
                                               std::type_identity_t<std::complex<Scalar>> n2) {
  using Complex = std::complex<Scalar>;
  if (!std::isfinite(incidence_deg) || incidence_deg < 0 || incidence_deg >= 90) {
    throw DomainError("incidence angle must lie in [0, 90) degrees");
  }
  const auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(n1) || !finite(n2)) throw DomainError("refractive indices must be finite");
  if (n1 == Complex(0) || n2 == Complex(0)) throw DomainError("refractive indices must be nonzero");

  const Scalar theta = static_cast<Scalar>(units::deg_to_rad(incidence_deg));
  const Scalar ci = std::cos(theta);
  const Scalar si = std::sin(theta);

  // n2 * cos(theta_t) on the decaying branch; force +0 imaginary part so a
  // purely real negative radicand lands on +i (evanescent, not growing).
  Complex radicand = n2 * n2 - n1 * n1 * (si * si);
  if (radicand.imag() == Scalar(0)) radicand = Complex(radicand.real(), Scalar(0));
  const Complex n2ct = std::sqrt(radicand);

  FresnelCoefficients<Scalar> out;
  out.r_s = (n1 * ci - n2ct) / (n1 * ci + n2ct);
  out.r_p = (n1 * n2ct - n2 * n2 * ci) / (n1 * n2ct + n2 * n2 * ci);
  return out;
}

}  // namespace fldi::optics
