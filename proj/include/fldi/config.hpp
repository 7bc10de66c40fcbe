#pragma once

// Experiment configuration: one JSON document, shared blocks plus one block
// per subcommand. Every key is optional (defaults below); unknown keys are
// rejected with their JSON pointer.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fldi/detection.hpp"
#include "fldi/phase_matching.hpp"
#include "fldi/source_model.hpp"

namespace fldi::config {

/// Inclusive arithmetic grid. start == stop gives one point.
struct Grid {
  double start = 0;
  double stop = 0;
  double step = 1;

  std::vector<double> values() const;
  bool operator==(const Grid&) const = default;
};

struct SourceBlock {
  double pump_angle_deg = 45.0;
  double pump_phase_rad = 0.0;
  double lcvr_phase_rad = 0.0;
  std::string ccr_model = "ideal";
  std::optional<double> ccr_entry_orientation_deg;
  double bd_split_ratio_error = 0.0;
  double dephasing = 0.0;
  double pass_gain = 1.0;
  /// Pairs/s/mW reaching the analysers, before detector efficiency.
  double pair_generation_rate_per_mw = 1.478e8;
  double multipair_coherence_ps = 0.0;

  source::SourceConfig to_source_config() const;
  bool operator==(const SourceBlock&) const = default;
};

struct CrystalBlock {
  double poling_period_um = 3.425;
  double length_mm = 10.0;
  double temperature_c = 25.0;
  /// "builtin" or a path (relative paths resolve against the config file).
  std::string dispersion = "builtin";

  bool operator==(const CrystalBlock&) const = default;
};

struct PhasematchRun {
  Grid pump_nm{404.0, 406.0, 0.1};
  Grid temp_c{15.0, 45.0, 1.0};
  std::string observable = "pair-rate";  // or "heralding"
  double band_center_nm = 780.0;
  double band_width_nm = 10.0;
  double window_half_width_nm = 40.0;
  double resolution_nm = 0.05;
  bool double_pass = true;

  bool operator==(const PhasematchRun&) const = default;
};

struct PowersweepRun {
  std::vector<double> powers_mw{0.01, 0.02, 0.05, 0.086, 0.15, 0.3, 0.5, 0.75, 1.0, 1.5};
  double duration_s = 0.01;
  double filter_transmission = 1.0;

  bool operator==(const PowersweepRun&) const = default;
};

struct VisibilityRun {
  std::vector<double> signal_angles_deg{0.0, 90.0, 45.0, 135.0};
  double idler_step_deg = 5.0;
  double pairs_per_point = 1e5;
  double pump_power_mw = 0.005;

  bool operator==(const VisibilityRun&) const = default;
};

struct MisalignRun {
  Grid tip_deg{-1.5, 1.5, 0.05};
  Grid tilt_deg{0.0, 0.0, 1.0};
  bool compensated = false;
  double lever_arm_mm = 10.0;
  double recovery_factor = 0.2;
  /// Unset: calibrated from the uncompensated edge retention.
  std::optional<double> beam_waist_um;
  double optimum_pair_rate = 2.5e6;
  double optimum_heralding = 0.30;

  bool operator==(const MisalignRun&) const = default;
};

struct StabilityRun {
  double duration_s = 13000.0;
  double bin_s = 13e-3;
  double drift_per_hour = 0.0;
  bool write_series = true;

  bool operator==(const StabilityRun&) const = default;
};

struct CcrRun {
  std::vector<std::string> models{"ideal", "uncoated-solid", "gold-solid", "silver-hollow"};
  Grid hwp_deg{0.0, 90.0, 2.5};

  bool operator==(const CcrRun&) const = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 20240601;
  double pump_power_mw = 0.086;
  double window_ns = 20.0;
  SourceBlock source;
  CrystalBlock crystal;
  // Effective dead time of the whole detection chain, not the bare SPAD.
  stats::DetectorModel signal_detector{0.14, 500.0, 350.0, 100.0};
  stats::DetectorModel idler_detector{0.14, 500.0, 350.0, 100.0};
  PhasematchRun phasematch;
  PowersweepRun powersweep;
  VisibilityRun visibility;
  MisalignRun misalign;
  StabilityRun stability;
  CcrRun ccr;

  /// Directory used to resolve relative paths; not serialized.
  std::filesystem::path base_dir;

  static ExperimentConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  /// ConfigError for unreadable files as well as bad contents.
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Canonical form: every key, fixed order, two-space indent.
  std::string to_json() const;
  /// FNV-1a 64 of the canonical form, 16 hex digits.
  std::string hash() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  qpm::CrystalSpec crystal_spec() const;
  stats::PowerSweepModel sweep_model() const;

  bool operator==(const ExperimentConfig& o) const;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace fldi::config
