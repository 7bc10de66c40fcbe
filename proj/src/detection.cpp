#include "fldi/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "fldi/csv.hpp"
#include "fldi/errors.hpp"
#include "fldi/random.hpp"
#include "fldi/units.hpp"

namespace fldi::stats {
namespace {

// Stream ids for derive_seed.
enum : std::uint64_t {
  kStreamPairs = 1,
  kStreamDarkSignal = 2,
  kStreamDarkIdler = 3,
  kStreamMultiSignal = 4,
  kStreamMultiIdler = 5,
  kStreamSweepBase = 1000,
  kStreamBinned = 7,
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

std::vector<double> poisson_times(Rng& rng, double rate, double duration_s) {
  std::vector<double> t;
  if (rate <= 0) return t;
  std::poisson_distribution<std::int64_t> count(rate * duration_s);
  const auto n = count(rng);
  std::uniform_real_distribution<double> u(0.0, duration_s);
  t.resize(static_cast<std::size_t>(n));
  for (auto& x : t) x = u(rng);
  std::sort(t.begin(), t.end());
  return t;
}

// Uncorrelated detections (darks or multi-pair photons) added to a channel.
void add_background(std::vector<std::int64_t>& out, Rng& rng, double rate, double duration_s) {
  for (double t : poisson_times(rng, rate, duration_s)) out.push_back(std::llround(units::s_to_ps(t)));
}

bool strictly_increasing(const std::vector<std::int64_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

void DetectorModel::validate() const {
  require(std::isfinite(efficiency) && efficiency >= 0 && efficiency <= 1, "detector efficiency must lie in [0, 1]");
  require(std::isfinite(dark_rate) && dark_rate >= 0, "dark rate must be non-negative");
  require(std::isfinite(jitter_sigma_ps) && jitter_sigma_ps >= 0, "jitter must be non-negative");
  require(std::isfinite(dead_time_ns) && dead_time_ns >= 0, "dead time must be non-negative");
}

void TagStream::validate() const {
  if (duration_ps < 0) throw DataError("tag stream duration must be non-negative");
  for (const auto* ch : {&signal, &idler}) {
    if (!strictly_increasing(*ch)) throw DataError("tag timestamps must be strictly increasing");
    if (!ch->empty() && (ch->front() < 0 || ch->back() > duration_ps)) {
      throw DataError("tag timestamp outside [0, duration]");
    }
  }
}

std::vector<std::int64_t> apply_dead_time(std::span<const std::int64_t> sorted, std::int64_t dead_time_ps) {
  std::vector<std::int64_t> out;
  out.reserve(sorted.size());
  for (auto t : sorted) {
    if (out.empty() || (t > out.back() && t - out.back() >= dead_time_ps)) out.push_back(t);
  }
  return out;
}

TagStream simulate_tags(const TagSimulation& sim) {
  require(std::isfinite(sim.pair_rate) && sim.pair_rate >= 0, "pair rate must be non-negative");
  require(std::isfinite(sim.duration_s) && sim.duration_s > 0, "duration must be positive");
  require(std::isfinite(sim.multipair_coherence_ps) && sim.multipair_coherence_ps >= 0,
          "multi-pair coherence time must be non-negative");
  sim.signal_detector.validate();
  sim.idler_detector.validate();

  const auto duration_ps = std::llround(units::s_to_ps(sim.duration_s));
  std::vector<std::int64_t> sig, idl;

  // Cumulative outcome probabilities for one pair at the polarizers.
  double p_both = 1, p_sig = 0, p_idl = 0;
  if (sim.polarizers) {
    const auto p = quantum::projection_probabilities(sim.state, sim.polarizers->signal_deg, sim.polarizers->idler_deg);
    p_both = p.both;
    p_sig = p.signal - p.both;
    p_idl = p.idler - p.both;
  }

  Rng rng = make_rng(sim.seed, kStreamPairs);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto jitter = [&](double sigma) { return sigma > 0 ? sigma * gauss(rng) : 0.0; };
  const double eta_s = sim.signal_detector.efficiency, eta_i = sim.idler_detector.efficiency;

  for (double t : poisson_times(rng, sim.pair_rate, sim.duration_s)) {
    const double t_ps = units::s_to_ps(t);
    const double r = u(rng);
    bool s_pass = false, i_pass = false;
    if (r < p_both) {
      s_pass = i_pass = true;
    } else if (r < p_both + p_sig) {
      s_pass = true;
    } else if (r < p_both + p_sig + p_idl) {
      i_pass = true;
    }
    // Draw both detection decisions unconditionally to keep the stream layout fixed.
    const bool s_det = u(rng) < eta_s;
    const bool i_det = u(rng) < eta_i;
    const double js = jitter(sim.signal_detector.jitter_sigma_ps);
    const double ji = jitter(sim.idler_detector.jitter_sigma_ps);
    if (s_pass && s_det) sig.push_back(std::llround(t_ps + js));
    if (i_pass && i_det) idl.push_back(std::llround(t_ps + ji));
  }

  const double multi_rate = sim.pair_rate * sim.pair_rate * sim.multipair_coherence_ps * 1e-12;
  Rng dark_s = make_rng(sim.seed, kStreamDarkSignal), dark_i = make_rng(sim.seed, kStreamDarkIdler);
  Rng multi_s = make_rng(sim.seed, kStreamMultiSignal), multi_i = make_rng(sim.seed, kStreamMultiIdler);
  add_background(sig, dark_s, sim.signal_detector.dark_rate, sim.duration_s);
  add_background(idl, dark_i, sim.idler_detector.dark_rate, sim.duration_s);
  add_background(sig, multi_s, multi_rate * eta_s, sim.duration_s);
  add_background(idl, multi_i, multi_rate * eta_i, sim.duration_s);

  const auto finish = [&](std::vector<std::int64_t>& v, const DetectorModel& d) {
    std::erase_if(v, [&](std::int64_t t) { return t < 0 || t > duration_ps; });
    std::sort(v.begin(), v.end());
    return apply_dead_time(v, std::llround(units::ns_to_ps(d.dead_time_ns)));
  };
  TagStream out;
  out.duration_ps = duration_ps;
  out.signal = finish(sig, sim.signal_detector);
  out.idler = finish(idl, sim.idler_detector);
  return out;
}

CoincidenceCounts count_coincidences(const TagStream& stream, double window_ns) {
  if (!std::isfinite(window_ns) || window_ns < 0) throw DomainError("coincidence window must be non-negative");
  const auto& a = stream.signal;
  const auto& b = stream.idler;
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end())) {
    throw DataError("coincidence counting requires sorted tag streams");
  }
  const std::int64_t w = std::llround(units::ns_to_ps(window_ns));
  CoincidenceCounts out;
  out.singles_signal = static_cast<std::int64_t>(a.size());
  out.singles_idler = static_cast<std::int64_t>(b.size());

  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const std::int64_t d = b[j] - a[i];
    if (2 * d < -w) {
      ++j;
    } else if (2 * d > w) {
      ++i;
    } else if (i + 1 < a.size() && std::llabs(b[j] - a[i + 1]) < std::llabs(d)) {
      ++i;
    } else if (j + 1 < b.size() && std::llabs(b[j + 1] - a[i]) < std::llabs(d)) {
      ++j;
    } else {
      ++out.coincidences;
      ++i;
      ++j;
    }
  }
  return out;
}

double accidental_rate(double singles_signal, double singles_idler, double window_ns) {
  if (singles_signal < 0 || singles_idler < 0 || window_ns < 0) {
    throw DomainError("accidental rate inputs must be non-negative");
  }
  return singles_signal * singles_idler * units::ns_to_s(window_ns);
}

std::string RateSummary::csv_header() {
  return "pump_power_mW,window_ns,S_signal,S_idler,C,A,CAR,heralding_signal,heralding_idler,"
         "heralding_signal_bgsub,heralding_idler_bgsub,brightness";
}

std::string RateSummary::csv_row() const {
  std::string s;
  for (double x : {pump_power_mw, window_ns, singles_signal, singles_idler, coincidences, accidentals,
                   car_infinite ? std::numeric_limits<double>::infinity() : car, heralding_signal, heralding_idler,
                   heralding_signal_bgsub, heralding_idler_bgsub, brightness}) {
    if (!s.empty()) s += ',';
    s += csv::num(x);
  }
  return s;
}

RateSummary summarize_rates(double singles_signal, double singles_idler, double coincidences, double window_ns,
                            double pump_power_mw) {
  require(pump_power_mw > 0, "pump power must be positive");
  require(window_ns > 0, "coincidence window must be positive");
  require(singles_signal >= 0 && singles_idler >= 0 && coincidences >= 0, "rates must be non-negative");
  RateSummary r;
  r.pump_power_mw = pump_power_mw;
  r.window_ns = window_ns;
  r.singles_signal = singles_signal;
  r.singles_idler = singles_idler;
  r.coincidences = coincidences;
  r.accidentals = accidental_rate(singles_signal, singles_idler, window_ns);
  if (r.accidentals > 0) {
    r.car = coincidences / r.accidentals;
  } else {
    r.car = std::numeric_limits<double>::infinity();
    r.car_infinite = true;
  }
  const auto ratio = [](double num, double den) { return den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0; };
  r.heralding_signal = ratio(coincidences, singles_idler);
  r.heralding_idler = ratio(coincidences, singles_signal);
  const double true_c = std::max(0.0, coincidences - r.accidentals);
  r.heralding_signal_bgsub = ratio(true_c, singles_idler);
  r.heralding_idler_bgsub = ratio(true_c, singles_signal);
  r.brightness = coincidences / pump_power_mw;
  return r;
}

RateSummary rate_summary(const TagStream& stream, double window_ns, double pump_power_mw) {
  stream.validate();
  if (stream.duration_ps <= 0) throw DataError("tag stream duration must be positive");
  const auto c = count_coincidences(stream, window_ns);
  const double t = stream.duration_s();
  return summarize_rates(c.singles_signal / t, c.singles_idler / t, c.coincidences / t, window_ns, pump_power_mw);
}

namespace {

void validate_sweep_model(const PowerSweepModel& m) {
  require(std::isfinite(m.source_brightness) && m.source_brightness >= 0, "source brightness must be non-negative");
  require(m.filter_transmission >= 0 && m.filter_transmission <= 1, "filter transmission must lie in [0, 1]");
  require(m.multipair_coherence_ps >= 0, "multi-pair coherence time must be non-negative");
  require(m.window_ns > 0, "coincidence window must be positive");
  require(m.duration_s > 0, "duration must be positive");
  m.signal_detector.validate();
  m.idler_detector.validate();
}

void validate_power_grid(std::span<const double> powers) {
  if (powers.empty()) throw DomainError("power grid is empty");
  for (std::size_t k = 0; k < powers.size(); ++k) {
    require(std::isfinite(powers[k]) && powers[k] > 0, "pump powers must be positive");
    if (k > 0) require(powers[k] > powers[k - 1], "pump powers must be ascending");
  }
}

}  // namespace

RateSummary expected_rates(const PowerSweepModel& m, double p) {
  validate_sweep_model(m);
  require(std::isfinite(p) && p > 0, "pump power must be positive");
  const double pairs = m.source_brightness * p * m.filter_transmission;
  double p_both = 1, p_sig = 1, p_idl = 1;
  if (m.polarizers) {
    const auto pr = quantum::projection_probabilities(m.state, m.polarizers->signal_deg, m.polarizers->idler_deg);
    p_both = pr.both;
    p_sig = pr.signal;
    p_idl = pr.idler;
  }
  const double eta_s = m.signal_detector.efficiency, eta_i = m.idler_detector.efficiency;
  const double multi = pairs * pairs * m.multipair_coherence_ps * 1e-12;
  const double raw_s = pairs * p_sig * eta_s + m.signal_detector.dark_rate + multi * eta_s;
  const double raw_i = pairs * p_idl * eta_i + m.idler_detector.dark_rate + multi * eta_i;
  // Non-paralyzable dead time: live fraction 1 / (1 + raw * tau).
  const double live_s = 1.0 / (1.0 + raw_s * units::ns_to_s(m.signal_detector.dead_time_ns));
  const double live_i = 1.0 / (1.0 + raw_i * units::ns_to_s(m.idler_detector.dead_time_ns));
  const double s = raw_s * live_s;
  const double i = raw_i * live_i;
  const double true_c = pairs * p_both * eta_s * eta_i * live_s * live_i;
  const double accidental = std::max(0.0, s - true_c) * std::max(0.0, i - true_c) * units::ns_to_s(m.window_ns);
  return summarize_rates(s, i, true_c + accidental, m.window_ns, p);
}

double visibility_ceiling(const PowerSweepModel& model, double pump_power_mw) {
  PowerSweepModel m = model;
  m.state = quantum::phi_plus();
  m.polarizers = PolarizerAngles{0.0, 0.0};
  const double c_max = expected_rates(m, pump_power_mw).coincidences;
  m.polarizers = PolarizerAngles{0.0, 90.0};
  const double c_min = expected_rates(m, pump_power_mw).coincidences;
  return c_max + c_min > 0 ? (c_max - c_min) / (c_max + c_min) : 0.0;
}

std::vector<RateSummary> power_sweep(const PowerSweepModel& m, std::span<const double> powers_mw) {
  validate_sweep_model(m);
  validate_power_grid(powers_mw);
  std::vector<RateSummary> out;
  out.reserve(powers_mw.size());
  for (std::size_t k = 0; k < powers_mw.size(); ++k) {
    TagSimulation sim;
    sim.pair_rate = m.source_brightness * powers_mw[k] * m.filter_transmission;
    sim.state = m.state;
    sim.polarizers = m.polarizers;
    sim.signal_detector = m.signal_detector;
    sim.idler_detector = m.idler_detector;
    sim.duration_s = m.duration_s;
    sim.seed = derive_seed(m.seed, kStreamSweepBase + k);
    sim.multipair_coherence_ps = m.multipair_coherence_ps;
    out.push_back(rate_summary(simulate_tags(sim), m.window_ns, powers_mw[k]));
  }
  return out;
}

BinnedSeries simulate_binned_counts(const BinnedModel& m) {
  require(m.bin_s > 0, "bin width must be positive");
  require(m.coincidence_rate >= 0, "coincidence rate must be non-negative");
  require(m.singles_signal >= m.coincidence_rate && m.singles_idler >= m.coincidence_rate,
          "singles rates must not be below the coincidence rate");
  require(m.pump_power_mw > 0, "pump power must be positive");
  Rng rng = make_rng(m.seed, kStreamBinned);
  BinnedSeries out;
  out.coincidences.resize(m.n_bins);
  out.singles_signal.resize(m.n_bins);
  out.singles_idler.resize(m.n_bins);
  out.brightness.resize(m.n_bins);
  out.heralding.resize(m.n_bins);
  const auto poisson = [&](double mean) {
    return mean > 0 ? static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng)) : 0.0;
  };
  for (std::size_t k = 0; k < m.n_bins; ++k) {
    const double hours = (static_cast<double>(k) + 0.5) * m.bin_s / 3600.0;
    const double scale = std::max(0.0, 1.0 + m.drift_per_hour * hours) * m.bin_s;
    const double c = poisson(m.coincidence_rate * scale);
    const double s1 = c + poisson((m.singles_signal - m.coincidence_rate) * scale);
    const double s2 = c + poisson((m.singles_idler - m.coincidence_rate) * scale);
    out.coincidences[k] = c;
    out.singles_signal[k] = s1;
    out.singles_idler[k] = s2;
    out.brightness[k] = c / m.bin_s / m.pump_power_mw;
    out.heralding[k] = s2 > 0 ? c / s2 : 0.0;
  }
  return out;
}

}  // namespace fldi::stats
