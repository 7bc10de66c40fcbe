#include <doctest.h>

#include <cmath>

#include "fldi/errors.hpp"
#include "fldi/two_photon.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::quantum;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("Bell states") {
  CHECK(fidelity(phi_plus(), phi_plus()) == doctest::Approx(1));
  CHECK(fidelity(phi_minus(), phi_plus()) == doctest::Approx(0).epsilon(1e-15));
  CHECK(relative_phase(phi_plus()) == doctest::Approx(0));
  CHECK(std::abs(relative_phase(phi_minus())) == doctest::Approx(kPi));
  CHECK(fidelity(maximally_mixed(), phi_plus()) == doctest::Approx(0.25));
  CHECK(is_physical(maximally_mixed()));
  test::Gen g(51);
  for (int k = 0; k < 50; ++k) {
    const double phi = g.uniform(-kPi, kPi);
    const auto s = bell_phi(phi);
    CHECK(s.is_normalized());
    CHECK(relative_phase(s) == doctest::Approx(phi));
    // |<Phi+|psi>|^2 = cos^2(phi / 2)
    CHECK(fidelity(s, phi_plus()) == doctest::Approx(std::pow(std::cos(phi / 2), 2)));
  }
}

TEST_CASE("dephasing lowers Phi+ fidelity by d/2 and keeps the state physical") {
  test::Gen g(52);
  for (int k = 0; k < 50; ++k) {
    const double d = g.uniform();
    const auto s = apply_dephasing(phi_plus(), d);
    CHECK(fidelity(s, phi_plus()) == doctest::Approx(1 - d / 2));
    CHECK(is_physical(s));
    CHECK(s.trace() == doctest::Approx(1));
  }
  CHECK_THROWS_AS(apply_dephasing(phi_plus(), 1.5), DomainError);
  CHECK(apply_dephasing(phi_plus(), 0).is_pure());
}

TEST_CASE("kron ordering puts the signal photon first") {
  const optics::JonesVector<double> h(1, 0), v(0, 1);
  const auto hv = kron(h, v);
  CHECK(std::abs(hv(kHV)) == 1.0);
  CHECK(hv.squaredNorm() == 1.0);
  const auto vh = kron(v, h);
  CHECK(std::abs(vh(kVH)) == 1.0);
}

TEST_CASE("projection of Phi+ onto linear polarizers") {
  test::Gen g(53);
  for (int k = 0; k < 100; ++k) {
    const double a = g.uniform(-180, 180), b = g.uniform(-180, 180);
    const auto p = projection_probabilities(phi_plus(), a, b);
    const double c = std::cos((b - a) * kPi / 180);
    CHECK(p.both == doctest::Approx(0.5 * c * c));
    CHECK(p.signal == doctest::Approx(0.5));
    CHECK(p.idler == doctest::Approx(0.5));
    const auto m = projection_probabilities(maximally_mixed(), a, b);
    CHECK(m.both == doctest::Approx(0.25));
  }
}

TEST_CASE("pure and mixed constructors validate input") {
  CHECK_NOTHROW(phi_plus().normalized().amplitudes());
  CHECK_THROWS(apply_dephasing(phi_plus(), 0.2).amplitudes());
  CHECK_THROWS_AS(TwoPhotonState::pure(Amplitudes::Zero()).normalized(), DomainError);
  DensityMatrix bad = DensityMatrix::Zero();
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(TwoPhotonState::mixed(bad), DomainError);
  CHECK(phi_plus().csv().rfind("basis,re,im\n", 0) == 0);
  CHECK(maximally_mixed().csv().rfind("row,col,re,im\n", 0) == 0);
}
