#pragma once

// Detection-chain Monte Carlo and rate bookkeeping.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fldi/two_photon.hpp"

namespace fldi::stats {

struct DetectorModel {
  double efficiency = 1.0;
  double dark_rate = 0.0;       // counts/s
  double jitter_sigma_ps = 0.0;
  double dead_time_ns = 0.0;

  void validate() const;
};

enum class Channel : std::uint8_t { kSignal = 0, kIdler = 1 };

/// Per-channel timestamps in integer picoseconds.
struct TagStream {
  std::vector<std::int64_t> signal;
  std::vector<std::int64_t> idler;
  std::int64_t duration_ps = 0;

  double duration_s() const { return static_cast<double>(duration_ps) * 1e-12; }
  /// Throws DataError unless both channels are strictly increasing in [0, duration].
  void validate() const;
  bool operator==(const TagStream&) const = default;
};

struct PolarizerAngles {
  double signal_deg;
  double idler_deg;
};

struct TagSimulation {
  double pair_rate = 0.0;  // pairs/s reaching the analysers
  quantum::TwoPhotonState state = quantum::phi_plus();
  std::optional<PolarizerAngles> polarizers;
  DetectorModel signal_detector;
  DetectorModel idler_detector;
  double duration_s = 1.0;
  std::uint64_t seed = 0;
  /// Multi-pair emissions: extra uncorrelated photons per channel at
  /// pair_rate^2 * coherence time.
  double multipair_coherence_ps = 0.0;
};

/// Poissonian pairs, projective polarizer sampling, efficiency loss, Gaussian
/// jitter, Poissonian darks, non-paralyzable dead time. Deterministic in seed.
TagStream simulate_tags(const TagSimulation& sim);

/// Keeps a tag only if it lies at least one dead time after the last kept tag
/// (and strictly after it). Input must be sorted.
std::vector<std::int64_t> apply_dead_time(std::span<const std::int64_t> sorted, std::int64_t dead_time_ps);

struct CoincidenceCounts {
  std::int64_t coincidences = 0;
  std::int64_t singles_signal = 0;
  std::int64_t singles_idler = 0;
};

/// Full window: tags coincide iff 2*|t1 - t2| <= window. One-to-one greedy
/// matching in time order; a tag is skipped in favour of its successor when
/// the successor is strictly closer to the current partner. Linear time.
CoincidenceCounts count_coincidences(const TagStream& stream, double window_ns);

/// S1 * S2 * window.
double accidental_rate(double singles_signal, double singles_idler, double window_ns);

struct RateSummary {
  double pump_power_mw = 0;
  double window_ns = 0;
  double singles_signal = 0;
  double singles_idler = 0;
  double coincidences = 0;
  double accidentals = 0;
  double car = 0;
  bool car_infinite = false;
  double heralding_signal = 0;  // C / S_idler
  double heralding_idler = 0;   // C / S_signal
  double heralding_signal_bgsub = 0;
  double heralding_idler_bgsub = 0;
  double brightness = 0;  // pairs/s/mW

  static std::string csv_header();
  std::string csv_row() const;
};

RateSummary summarize_rates(double singles_signal, double singles_idler, double coincidences, double window_ns,
                            double pump_power_mw);

RateSummary rate_summary(const TagStream& stream, double window_ns, double pump_power_mw);

struct PowerSweepModel {
  /// Pairs/s/mW reaching the analysers before detector efficiency.
  double source_brightness = 2.5e6;
  quantum::TwoPhotonState state = quantum::phi_plus();
  std::optional<PolarizerAngles> polarizers;
  DetectorModel signal_detector;
  DetectorModel idler_detector;
  double multipair_coherence_ps = 0.0;
  /// Pair-preserving band selection: scales the pair rate only.
  double filter_transmission = 1.0;
  double window_ns = 20.0;
  double duration_s = 0.02;
  std::uint64_t seed = 0;
};

/// Closed-form expected rates. Accidentals are counted only between unpaired
/// detections (darks, multi-pair photons, lost partners), so with unit
/// efficiency and no noise the coincidence rate is exactly linear in P.
RateSummary expected_rates(const PowerSweepModel& model, double pump_power_mw);

/// Highest fringe visibility the detection chain allows at pump power P:
/// (C_max - C_min) / (C_max + C_min) for an ideal Phi+ analysed in the H
/// basis, from expected_rates. Accidentals alone set the gap to 1.
double visibility_ceiling(const PowerSweepModel& model, double pump_power_mw);

/// Monte Carlo sweep, one derived seed per grid index.
std::vector<RateSummary> power_sweep(const PowerSweepModel& model, std::span<const double> powers_mw);

struct BinnedModel {
  double coincidence_rate = 0;  // per second
  double singles_signal = 0;
  double singles_idler = 0;
  double pump_power_mw = 0.086;
  double bin_s = 13e-3;
  std::size_t n_bins = 0;
  /// Fractional rate change per hour (linear drift).
  double drift_per_hour = 0;
  std::uint64_t seed = 0;
};

struct BinnedSeries {
  std::vector<double> coincidences;  // counts per bin
  std::vector<double> singles_signal;
  std::vector<double> singles_idler;
  std::vector<double> brightness;  // pairs/s/mW
  std::vector<double> heralding;   // C / S_idler
};

/// Per-bin Poisson counts (coincidences shared by both singles channels).
BinnedSeries simulate_binned_counts(const BinnedModel& model);

// Tag file formats. Binary: a text header line
//   TAGS1 duration_ps=<n> channels=2
// followed by 9-byte records (channel u8, timestamp_ps u64 little-endian)
// merged in time order. CSV: header `channel,timestamp_ps`.
void write_tags_binary(const TagStream& stream, std::ostream& out);
TagStream read_tags_binary(std::istream& in);
void write_tags_csv(const TagStream& stream, std::ostream& out);
/// CSV carries no duration; it is taken as the last timestamp unless given.
TagStream read_tags_csv(std::istream& in, std::optional<std::int64_t> duration_ps = std::nullopt);

}  // namespace fldi::stats
