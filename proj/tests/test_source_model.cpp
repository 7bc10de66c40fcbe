#include <doctest.h>

#include <cmath>

#include "fldi/errors.hpp"
#include "fldi/source_model.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::source;
using optics::CcrModel;
using optics::PolarizationState;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("diagonal pump with an ideal cube emits Phi+, LCVR pi flips to Phi-") {
  SourceConfig c;
  auto r = trace_source(c);
  CHECK(r.state.is_pure());
  CHECK(quantum::fidelity(r.state, quantum::phi_plus()) == doctest::Approx(1).epsilon(1e-12));
  c.lcvr_phase_rad = kPi;
  CHECK(quantum::fidelity(trace_paths(c), quantum::phi_minus()) == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("LCVR phase sets the relative phase one to one") {
  test::Gen g(61);
  for (int k = 0; k < 50; ++k) {
    SourceConfig c;
    c.lcvr_phase_rad = g.uniform(-3, 3);
    const auto s = trace_paths(c);
    const double diff = std::remainder(quantum::relative_phase(s) + c.lcvr_phase_rad, 2 * kPi);
    CHECK(std::abs(diff) < 1e-9);
    CHECK(quantum::fidelity(s, quantum::bell_phi(-c.lcvr_phase_rad)) == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("pump angle sets the HH / VV weights") {
  test::Gen g(62);
  for (int k = 0; k < 50; ++k) {
    SourceConfig c;
    const double a = g.uniform(5, 85);
    c.pump_polarization = PolarizationState<double>::linear(a);
    const auto amps = trace_paths(c).amplitudes();
    const double hh = std::norm(amps(quantum::kHH)), vv = std::norm(amps(quantum::kVV));
    CHECK(hh == doctest::Approx(std::pow(std::sin(a * kPi / 180), 2)));
    CHECK(vv == doctest::Approx(std::pow(std::cos(a * kPi / 180), 2)));
    CHECK(std::abs(amps(quantum::kHV)) < 1e-12);
  }
}

TEST_CASE("double pass doubles the pair rate at unit gain") {
  SourceConfig c;
  const double one = trace_source(c).relative_pair_rate;
  c.pass_gain = 0.0;
  const double single = trace_source(c).relative_pair_rate;
  CHECK(one / single == doctest::Approx(2.0));
  CHECK(double_pass_rate_gain(1.0) == 2.0);
  CHECK_THROWS_AS(double_pass_rate_gain(-1), DomainError);
}

TEST_CASE("real corner cubes keep the state pure Phi+ without beam-displacer leakage") {
  for (const char* name : {"uncoated-solid", "gold-solid", "silver-hollow"}) {
    SourceConfig c;
    c.ccr = CcrModel::named(name);
    const auto s = trace_paths(c);
    CHECK(quantum::fidelity(s, quantum::phi_plus()) == doctest::Approx(1).epsilon(1e-9));
    // Off-axis entry gives the cube cross-polarization terms that leakage can pick up.
    c.ccr.entry_orientation_deg = 20.0;
    CHECK(quantum::fidelity(trace_paths(c), quantum::phi_plus()) == doctest::Approx(1).epsilon(1e-9));
    c.bd_split_ratio_error = 0.05;
    const auto leaky = trace_paths(c);
    CHECK(quantum::is_physical(leaky));
    CHECK(quantum::fidelity(leaky, quantum::phi_plus()) < 1.0 - 1e-9);
  }
}

TEST_CASE("dephasing passes through") {
  SourceConfig c;
  c.dephasing = 0.1;
  CHECK(quantum::fidelity(trace_paths(c), quantum::phi_plus()) == doctest::Approx(0.95));
  c.dephasing = 2;
  CHECK_THROWS_AS(trace_source(c), DomainError);
}

TEST_CASE("misalignment calibration anchors") {
  const auto s = MisalignmentSetting::calibrated(1.0, 0.0);
  const auto r = misalignment_response(s);
  CHECK(r.relative_coincidences == doctest::Approx(0.4));
  CHECK(r.relative_heralding == doctest::Approx(std::sqrt(0.4)));
  CHECK(s.beam_waist_at_coupler_um == doctest::Approx(364.7).epsilon(1e-3));
  CHECK(misalignment_response(MisalignmentSetting::calibrated()).coupling == 1.0);
  const auto comp = misalignment_response(MisalignmentSetting::calibrated(-0.85, 0.0, true));
  CHECK(comp.relative_coincidences >= 0.95);
}

TEST_CASE("misalignment response is even and monotone in angle") {
  test::Gen g(63);
  for (int k = 0; k < 100; ++k) {
    const double a = g.uniform(0, 3), b = g.uniform(0, 3);
    const double ra = misalignment_coupling(MisalignmentSetting::calibrated(a, 0));
    CHECK(ra == doctest::Approx(misalignment_coupling(MisalignmentSetting::calibrated(-a, 0))));
    CHECK(ra == doctest::Approx(misalignment_coupling(MisalignmentSetting::calibrated(0, a))));
    const double rb = misalignment_coupling(MisalignmentSetting::calibrated(b, 0));
    if (a < b) CHECK(ra >= rb);
    CHECK(misalignment_coupling(MisalignmentSetting::calibrated(a, 0, true)) >= ra);
  }
  MisalignmentSetting bad;
  CHECK_THROWS_AS(misalignment_coupling(bad), DomainError);
}

TEST_CASE("no HV or VH amplitude without beam-displacer leakage, for any pump and cube") {
  test::Gen g(64);
  const char* models[] = {"ideal", "uncoated-solid", "gold-solid", "silver-hollow"};
  for (int k = 0; k < 200; ++k) {
    SourceConfig c;
    const std::complex<double> h(g.uniform(-1, 1), g.uniform(-1, 1)), v(g.uniform(-1, 1), g.uniform(-1, 1));
    if (std::abs(v) < 1e-3) continue;
    c.pump_polarization = PolarizationState<double>(h, v);
    c.lcvr_phase_rad = g.uniform(-kPi, kPi);
    c.ccr = CcrModel::named(models[k % 4]);
    c.ccr.entry_orientation_deg = g.uniform(0, 120);
    c.pass_gain = g.uniform(0, 2);
    const auto s = trace_paths(c);
    const auto rho = s.density();
    CHECK(std::abs(rho(quantum::kHV, quantum::kHV)) < 1e-24);
    CHECK(std::abs(rho(quantum::kVH, quantum::kVH)) < 1e-24);
    CHECK(quantum::is_physical(s));
  }
}
