#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fldi/detection.hpp"
#include "fldi/errors.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::stats;

namespace {

const double kPi = std::acos(-1.0);

// Brute force: all signal/idler pairs within the window, no one-to-one constraint.
std::int64_t all_pairs_within(const TagStream& s, std::int64_t w_ps) {
  std::int64_t n = 0;
  for (auto a : s.signal)
    for (auto b : s.idler)
      if (2 * std::llabs(a - b) <= w_ps) ++n;
  return n;
}

TagStream uncorrelated(double r1, double r2, double duration_s, std::uint64_t seed) {
  TagSimulation sim;
  sim.duration_s = duration_s;
  sim.seed = seed;
  sim.signal_detector.dark_rate = r1;
  sim.idler_detector.dark_rate = r2;
  return simulate_tags(sim);
}

}  // namespace

TEST_CASE("zero rates give empty streams") {
  TagSimulation sim;
  sim.duration_s = 1.0;
  const auto s = simulate_tags(sim);
  CHECK(s.signal.empty());
  CHECK(s.idler.empty());
  CHECK(s.duration_ps == 1'000'000'000'000);
}

TEST_CASE("tag counts are Poissonian in the pair rate") {
  test::Gen g(71);
  for (int k = 0; k < 10; ++k) {
    TagSimulation sim;
    sim.pair_rate = g.uniform(1e4, 1e6);
    sim.duration_s = g.uniform(0.01, 0.1);
    sim.seed = g.next();
    const auto s = simulate_tags(sim);
    const double mean = sim.pair_rate * sim.duration_s;
    CHECK(std::abs(static_cast<double>(s.signal.size()) - mean) <= 5 * std::sqrt(mean));
    // Ideal detectors: every pair yields a coincidence at zero delay.
    CHECK(s.signal == s.idler);
    CHECK_NOTHROW(s.validate());
  }
}

TEST_CASE("identical seeds give identical streams") {
  TagSimulation sim;
  sim.pair_rate = 2e5;
  sim.duration_s = 0.05;
  sim.signal_detector = {0.3, 1000, 350, 50};
  sim.idler_detector = {0.2, 800, 350, 50};
  sim.polarizers = PolarizerAngles{10, 40};
  sim.multipair_coherence_ps = 5;
  sim.seed = 99;
  const auto a = simulate_tags(sim);
  CHECK(a == simulate_tags(sim));
  sim.seed = 100;
  CHECK_FALSE(a == simulate_tags(sim));
}

TEST_CASE("crossed polarizers on Phi+ leave only accidentals") {
  TagSimulation sim;
  sim.pair_rate = 1e6;
  sim.duration_s = 0.1;
  sim.polarizers = PolarizerAngles{0, 90};
  sim.signal_detector.dark_rate = 1e5;
  sim.idler_detector.dark_rate = 1e5;
  sim.seed = 5;
  const auto s = simulate_tags(sim);
  const auto c = count_coincidences(s, 20);
  const double t = s.duration_s();
  const double expected = accidental_rate(c.singles_signal / t, c.singles_idler / t, 20) * t;
  CHECK(std::abs(c.coincidences - expected) <= 3 * std::sqrt(expected) + 1);
}

TEST_CASE("window boundary is inclusive at half the full width") {
  TagStream s;
  s.duration_ps = 1'000'000;
  s.signal = {100'000, 500'000};
  s.idler = {110'000, 489'999};
  CHECK(count_coincidences(s, 20).coincidences == 1);
  s.idler = {110'000, 490'000};
  CHECK(count_coincidences(s, 20).coincidences == 2);
  s.idler = {90'000, 510'001};
  CHECK(count_coincidences(s, 20).coincidences == 1);
}

TEST_CASE("identical timestamps all coincide, tags are never reused") {
  TagStream s;
  s.duration_ps = 10'000'000;
  for (std::int64_t t = 0; t < 100; ++t) s.signal.push_back(t * 50'000);
  s.idler = s.signal;
  CHECK(count_coincidences(s, 20).coincidences == 100);
  // One signal tag surrounded by three idler tags: one match.
  TagStream t;
  t.duration_ps = 1'000'000;
  t.signal = {500'000};
  t.idler = {495'000, 500'000, 505'000};
  CHECK(count_coincidences(t, 20).coincidences == 1);
}

TEST_CASE("matching never exceeds the unconstrained pair count or either channel") {
  test::Gen g(72);
  for (int k = 0; k < 30; ++k) {
    const auto s = uncorrelated(g.uniform(1e5, 5e6), g.uniform(1e5, 5e6), 1e-3, g.next());
    const double w = std::round(g.uniform(1, 200));
    const auto c = count_coincidences(s, w);
    CHECK(c.coincidences <= std::min(c.singles_signal, c.singles_idler));
    CHECK(c.coincidences <= all_pairs_within(s, std::llround(w * 1000)));
  }
}

TEST_CASE("unsorted input is a data error") {
  TagStream s;
  s.duration_ps = 1000;
  s.signal = {5, 3};
  s.idler = {1};
  CHECK_THROWS_AS(count_coincidences(s, 1), DataError);
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("uncorrelated streams: coincidences match S1 S2 window within 3 sigma") {
  test::Gen g(73);
  for (int k = 0; k < 5; ++k) {
    // Occupancy S * window stays below 1e-2 so one-to-one matching loses little.
    const double w = g.uniform(10, 40);
    const auto s = uncorrelated(g.uniform(5e4, 3e5), g.uniform(5e4, 3e5), 1.0, g.next());
    const auto c = count_coincidences(s, w);
    const double t = s.duration_s();
    const double expected = accidental_rate(c.singles_signal / t, c.singles_idler / t, w) * t;
    CHECK(std::abs(c.coincidences - expected) <= 3 * std::sqrt(expected));
  }
}

TEST_CASE("merged independent sources add up to the sum plus accidentals") {
  TagSimulation a;
  a.pair_rate = 2e5;
  a.duration_s = 0.1;
  a.signal_detector.jitter_sigma_ps = 300;
  a.idler_detector.jitter_sigma_ps = 300;
  a.seed = 1;
  TagSimulation b = a;
  b.seed = 2;
  const auto sa = simulate_tags(a), sb = simulate_tags(b);
  TagStream m;
  m.duration_ps = sa.duration_ps;
  std::merge(sa.signal.begin(), sa.signal.end(), sb.signal.begin(), sb.signal.end(), std::back_inserter(m.signal));
  std::merge(sa.idler.begin(), sa.idler.end(), sb.idler.begin(), sb.idler.end(), std::back_inserter(m.idler));
  m.signal.erase(std::unique(m.signal.begin(), m.signal.end()), m.signal.end());
  m.idler.erase(std::unique(m.idler.begin(), m.idler.end()), m.idler.end());
  const double w = 20;
  const auto ca = count_coincidences(sa, w), cb = count_coincidences(sb, w), cm = count_coincidences(m, w);
  // Cross terms between the two sources behave as accidentals.
  const double t = m.duration_s();
  const double cross = 2 * accidental_rate(sa.signal.size() / t, sb.idler.size() / t, w) * t;
  const double sum = static_cast<double>(ca.coincidences + cb.coincidences);
  CHECK(std::abs(cm.coincidences - sum) <= cross + 3 * std::sqrt(cross) + 1);
}

TEST_CASE("Phi+ Monte Carlo fraction follows cos^2 with 1/sqrt(N) error") {
  const double n = 1e5;
  for (double d : {0.0, 22.5, 45.0, 67.5, 90.0}) {
    TagSimulation sim;
    sim.pair_rate = n;
    sim.duration_s = 1.0;
    sim.polarizers = PolarizerAngles{30, 30 + d};
    sim.seed = 1000 + static_cast<std::uint64_t>(d);
    const auto s = simulate_tags(sim);
    const auto c = count_coincidences(s, 0.01);
    // Joint pass probability per pair is 1/2 cos^2; the marginal is 1/2.
    const double p = 0.5 * std::pow(std::cos(d * kPi / 180), 2);
    const double expected = p * n;
    CHECK(std::abs(c.coincidences - expected) <= 5 * std::sqrt(n * p * (1 - p)) + 1);
    const double frac = static_cast<double>(c.coincidences) / c.singles_signal;
    CHECK(std::abs(frac - 2 * p) < 5.0 / std::sqrt(0.5 * n));
  }
}

TEST_CASE("dead time never adds counts and enforces spacing") {
  test::Gen g(74);
  for (int k = 0; k < 50; ++k) {
    std::vector<std::int64_t> v(200);
    for (auto& x : v) x = g.integer(0, 1'000'000);
    std::sort(v.begin(), v.end());
    const std::int64_t tau = g.integer(0, 50'000);
    const auto out = apply_dead_time(v, tau);
    CHECK(out.size() <= v.size());
    for (std::size_t i = 1; i < out.size(); ++i) {
      CHECK(out[i] - out[i - 1] >= tau);
      CHECK(out[i] > out[i - 1]);
    }
    CHECK(apply_dead_time(out, tau) == out);
  }
}

TEST_CASE("rate arithmetic examples") {
  CHECK(accidental_rate(1e6, 1e6, 20) == doctest::Approx(20000));
  CHECK(accidental_rate(1e6, 1e6, 0) == 0);
  CHECK(accidental_rate(3e5, 7e5, 40) == doctest::Approx(2 * accidental_rate(3e5, 7e5, 20)));
  CHECK_THROWS_AS(accidental_rate(-1, 1, 1), DomainError);

  const auto r = summarize_rates(1.5e6, 1.5e6, 215000, 20, 0.086);
  CHECK(r.brightness == doctest::Approx(2.5e6).epsilon(1e-3));
  const auto h = summarize_rates(1.5e6, 1.5e6, 2.1e5, 20, 1);
  CHECK(h.heralding_signal == doctest::Approx(0.14));
  CHECK(h.car == doctest::Approx(2.1e5 / 45000));
  const auto z = summarize_rates(1e5, 1e5, 0, 20, 1);
  CHECK(z.heralding_signal == 0);
  CHECK(z.brightness == 0);
  const auto inf = summarize_rates(0, 1e5, 0, 20, 1);
  CHECK(inf.car_infinite);
  CHECK(std::isinf(inf.car));
  CHECK(inf.csv_row().find("inf") != std::string::npos);
  CHECK_THROWS_AS(summarize_rates(1, 1, 1, 20, 0), DomainError);
}

TEST_CASE("heralding stays in [0, 1] for any stream") {
  test::Gen g(75);
  for (int k = 0; k < 20; ++k) {
    TagSimulation sim;
    sim.pair_rate = g.uniform(1e4, 1e6);
    sim.duration_s = 0.01;
    sim.signal_detector = {g.uniform(), g.uniform(0, 1e5), g.uniform(0, 500), g.uniform(0, 100)};
    sim.idler_detector = {g.uniform(), g.uniform(0, 1e5), g.uniform(0, 500), g.uniform(0, 100)};
    sim.seed = g.next();
    const auto r = rate_summary(simulate_tags(sim), g.uniform(1, 50), 1.0);
    for (double h : {r.heralding_signal, r.heralding_idler, r.heralding_signal_bgsub, r.heralding_idler_bgsub}) {
      CHECK(h >= 0);
      CHECK(h <= 1);
    }
    CHECK(r.car >= 0);
  }
}

TEST_CASE("ideal chain gives exactly linear expected coincidences") {
  PowerSweepModel m;
  m.source_brightness = 1e6;
  double slope = 0;
  for (double p : {0.01, 0.1, 1.0, 10.0}) {
    const auto r = expected_rates(m, p);
    if (slope == 0) slope = r.coincidences / p;
    CHECK(r.coincidences / p == doctest::Approx(slope).epsilon(1e-12));
    CHECK(r.brightness == doctest::Approx(1e6));
  }
}

TEST_CASE("brightness falls with pump power once the chain saturates") {
  PowerSweepModel m;
  m.source_brightness = 1.478e8;
  m.signal_detector = m.idler_detector = {0.14, 500, 350, 100};
  m.multipair_coherence_ps = 0;
  const std::vector<double> grid{0.01, 0.02, 0.05, 0.086, 0.15, 0.3, 0.5, 0.75, 1.0, 1.5};
  double prev = std::numeric_limits<double>::infinity();
  for (double p : grid) {
    const auto r = expected_rates(m, p);
    CHECK(r.brightness <= prev);
    prev = r.brightness;
  }
  const auto at = expected_rates(m, 0.086);
  CHECK(at.brightness == doctest::Approx(2.5e6).epsilon(0.01));
  CHECK(at.heralding_signal == doctest::Approx(0.14).epsilon(0.02));

  m.duration_s = 0.02;
  m.seed = 3;
  const auto mc = power_sweep(m, grid);
  REQUIRE(mc.size() == grid.size());
  for (std::size_t k = 1; k < mc.size(); ++k) CHECK(mc[k].coincidences > mc[k - 1].coincidences);
  CHECK(mc.back().brightness < mc.front().brightness);
  CHECK_THROWS_AS(power_sweep(m, std::vector<double>{0.2, 0.1}), DomainError);
  CHECK_THROWS_AS(power_sweep(m, std::vector<double>{0.0, 0.1}), DomainError);
}

TEST_CASE("pair-preserving filter leaves heralding unchanged") {
  PowerSweepModel m;
  m.source_brightness = 1.478e8;
  m.signal_detector = m.idler_detector = {0.14, 0, 350, 0};
  m.duration_s = 0.2;
  m.seed = 11;
  const std::vector<double> grid{0.005, 0.01};
  const auto open = power_sweep(m, grid);
  m.filter_transmission = 0.5;
  const auto filtered = power_sweep(m, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double h = open[k].heralding_signal_bgsub, hf = filtered[k].heralding_signal_bgsub;
    const double n_open = open[k].singles_idler * m.duration_s, n_filt = filtered[k].singles_idler * m.duration_s;
    const double sigma = std::sqrt(h * (1 - h) * (1 / n_open + 1 / n_filt));
    CHECK(std::abs(h - hf) <= 4 * sigma);
    CHECK(expected_rates(m, grid[k]).heralding_signal_bgsub == doctest::Approx(0.14).epsilon(0.01));
  }
}

TEST_CASE("visibility ceiling") {
  PowerSweepModel m;
  m.source_brightness = 1e6;
  // Crossed polarizers leave unpaired photons, so accidentals grow with P.
  CHECK(visibility_ceiling(m, 1e-4) == doctest::Approx(1.0).epsilon(1e-5));
  const double v1 = visibility_ceiling(m, 1.0);
  CHECK(v1 < visibility_ceiling(m, 0.1));
  // Ideal detectors: parallel polarizers leave no unpaired photons, crossed ones leave R/2 per arm.
  const double r = 1e6, cmax = 0.5 * r, cmin = 0.25 * r * r * 20e-9;
  CHECK(v1 == doctest::Approx((cmax - cmin) / (cmax + cmin)));
  // Darks d add d^2 window at the maximum and (R/2 + d)^2 window at the minimum.
  const double d = 1e4, low = 100;
  m.signal_detector.dark_rate = m.idler_detector.dark_rate = d;
  const double hi = 0.5 * low + d * d * 20e-9, lo = (0.5 * low + d) * (0.5 * low + d) * 20e-9;
  CHECK(visibility_ceiling(m, 1e-4) == doctest::Approx((hi - lo) / (hi + lo)));
}

TEST_CASE("binned counts have the configured means") {
  BinnedModel m;
  m.coincidence_rate = 2e5;
  m.singles_signal = 1.5e6;
  m.singles_idler = 1.4e6;
  m.bin_s = 0.013;
  m.n_bins = 2000;
  m.seed = 8;
  const auto s = simulate_binned_counts(m);
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double n = static_cast<double>(m.n_bins);
  CHECK(std::abs(mean(s.coincidences) - 2600) < 5 * std::sqrt(2600 / n));
  CHECK(std::abs(mean(s.singles_idler) - 18200) < 5 * std::sqrt(18200 / n));
  CHECK(mean(s.brightness) == doctest::Approx(2e5 / 0.086).epsilon(0.01));
  for (std::size_t k = 0; k < m.n_bins; ++k) {
    CHECK(s.singles_signal[k] >= s.coincidences[k]);
    CHECK(s.heralding[k] <= 1.0);
  }
  m.singles_idler = 1e5;
  CHECK_THROWS_AS(simulate_binned_counts(m), DomainError);
}
