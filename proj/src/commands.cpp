#include "fldi/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fldi/analysis.hpp"
#include "fldi/ccr.hpp"
#include "fldi/csv.hpp"
#include "fldi/errors.hpp"
#include "fldi/random.hpp"

namespace fldi::cli {
namespace {

namespace fs = std::filesystem;
using config::ExperimentConfig;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << x;
  return os.str();
}

std::string basis_label(double signal_deg) {
  for (std::size_t k = 0; k < analysis::kBasisAngles.size(); ++k) {
    if (std::abs(signal_deg - analysis::kBasisAngles[k]) < 1e-9) return analysis::kBasisLabels[k];
  }
  return csv::num(signal_deg);
}

}  // namespace

void cmd_state(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto traced = source::trace_source(cfg.source.to_source_config());
  const auto& state = traced.state;
  write_file(dir / "state.csv", state.csv());
  const double f_plus = quantum::fidelity(state, quantum::phi_plus());
  const double f_minus = quantum::fidelity(state, quantum::phi_minus());
  std::ostringstream summary;
  summary << "quantity,value\n"
          << "fidelity_phi_plus," << csv::num(f_plus) << '\n'
          << "fidelity_phi_minus," << csv::num(f_minus) << '\n'
          << "relative_phase_rad," << csv::num(quantum::relative_phase(state)) << '\n'
          << "relative_pair_rate," << csv::num(traced.relative_pair_rate) << '\n'
          << "pure," << (state.is_pure() ? 1 : 0) << '\n';
  write_file(dir / "state_summary.csv", summary.str());
  out << state.csv() << "fidelity(Phi+) = " << fixed(f_plus) << "\nfidelity(Phi-) = " << fixed(f_minus) << '\n';
}

void cmd_phasematch(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto spec = cfg.crystal_spec();
  const auto& run = cfg.phasematch;
  qpm::MapOptions opts;
  opts.band_center_nm = run.band_center_nm;
  opts.band_width_nm = run.band_width_nm;
  opts.window_half_width_nm = run.window_half_width_nm;
  opts.resolution_nm = run.resolution_nm;
  opts.envelope.double_pass = run.double_pass;
  const auto observable =
      run.observable == "heralding" ? qpm::MapObservable::kHeraldingProxy : qpm::MapObservable::kPairRateProxy;
  const auto pumps = run.pump_nm.values();
  const auto temps = run.temp_c.values();
  const auto map = qpm::phase_match_map(spec, pumps, temps, observable, opts);
  write_file(dir / "phasematch_map.csv", map.csv());

  std::size_t failed = 0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < map.values.size(); ++k) {
    if (std::isnan(map.values[k])) {
      ++failed;
    } else if (std::isnan(map.values[best]) || map.values[k] > map.values[best]) {
      best = k;
    }
  }
  std::ostringstream meta;
  meta << "config_hash=" << cfg.hash() << '\n'
       << "observable=" << run.observable << '\n'
       << "pump_points=" << pumps.size() << '\n'
       << "temp_points=" << temps.size() << '\n'
       << "band_center_nm=" << csv::num(run.band_center_nm) << '\n'
       << "band_width_nm=" << csv::num(run.band_width_nm) << '\n'
       << "double_pass=" << (run.double_pass ? "true" : "false") << '\n'
       << "dispersion=" << spec.dispersion.name << '\n'
       << "failed_cells=" << failed << '\n';
  for (const auto& e : map.cell_errors) meta << "cell_error=" << e << '\n';
  write_file(dir / "phasematch_map.meta", meta.str());

  out << "cells: " << map.values.size() << ", failed: " << failed << '\n';
  if (failed < map.values.size()) {
    out << "peak " << run.observable << " at pump " << fixed(map.pump_nm[best / temps.size()], 3) << " nm, "
        << fixed(map.temp_c[best % temps.size()], 2) << " C: " << csv::num(map.values[best]) << '\n';
  }
}

void cmd_powersweep(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto model = cfg.sweep_model();
  const auto& powers = cfg.powersweep.powers_mw;
  const auto sim = stats::power_sweep(model, powers);

  std::string table = stats::RateSummary::csv_header() + '\n';
  std::string expected = table;
  for (std::size_t k = 0; k < sim.size(); ++k) {
    table += sim[k].csv_row() + '\n';
    expected += stats::expected_rates(model, powers[k]).csv_row() + '\n';
  }
  write_file(dir / "powersweep.csv", table);
  write_file(dir / "powersweep_expected.csv", expected);

  // Brightness in M pairs/s/mW and heralding in percent, the scales the
  // fixed unit numerator of a + 1/(P + b) is meaningful at.
  struct Series {
    const char* name;
    analysis::PowerModel model;
    std::vector<double> y;
  };
  std::vector<Series> series{{"coincidences", analysis::PowerModel::kLogForm, {}},
                             {"CAR", analysis::PowerModel::kLogForm, {}},
                             {"brightness_Mpairs_per_s_per_mW", analysis::PowerModel::kInverseForm, {}},
                             {"heralding_signal_bgsub_percent", analysis::PowerModel::kInverseForm, {}}};
  for (const auto& r : sim) {
    series[0].y.push_back(r.coincidences);
    series[1].y.push_back(r.car_infinite ? std::nan("") : r.car);
    series[2].y.push_back(r.brightness * 1e-6);
    series[3].y.push_back(r.heralding_signal_bgsub * 100);
  }
  std::string report;
  for (const auto& s : series) {
    report += "[" + std::string(s.name) + "]\n";
    try {
      report += analysis::fit_power_model(powers, s.y, s.model).report();
    } catch (const std::exception& e) {
      report += std::string("error: ") + e.what() + "\nconverged: false\n";
    }
    report += '\n';
  }
  write_file(dir / "powersweep_fits.txt", report);
  out << table << '\n' << report;
}

void cmd_visibility(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto& run = cfg.visibility;
  const auto state = source::trace_paths(cfg.source.to_source_config());
  const double pair_rate = cfg.source.pair_generation_rate_per_mw * run.pump_power_mw;
  if (!(pair_rate > 0)) throw DomainError("visibility run needs a positive pair rate");
  const double duration = run.pairs_per_point / pair_rate;
  const config::Grid idler_grid{0.0, 180.0, run.idler_step_deg};
  const auto idler = idler_grid.values();

  std::string curves = "basis,signal_deg,idler_deg,coincidences,rate_cps,expected_fraction\n";
  std::string summary = "basis,signal_deg,visibility,uncertainty,phase_offset_deg,amplitude\n";
  std::vector<analysis::VisibilityResult> results;
  for (std::size_t b = 0; b < run.signal_angles_deg.size(); ++b) {
    const double theta1 = run.signal_angles_deg[b];
    const auto label = basis_label(theta1);
    const auto expected = analysis::correlation_curve(state, theta1, idler);
    std::vector<analysis::CurveSample> samples;
    for (std::size_t k = 0; k < idler.size(); ++k) {
      stats::TagSimulation sim;
      sim.pair_rate = pair_rate;
      sim.state = state;
      sim.polarizers = stats::PolarizerAngles{theta1, idler[k]};
      sim.signal_detector = cfg.signal_detector;
      sim.idler_detector = cfg.idler_detector;
      sim.duration_s = duration;
      sim.multipair_coherence_ps = cfg.source.multipair_coherence_ps;
      sim.seed = derive_seed(cfg.seed, 10000 * (b + 1) + k);
      const auto counts = stats::count_coincidences(stats::simulate_tags(sim), cfg.window_ns);
      const auto c = static_cast<double>(counts.coincidences);
      samples.push_back({idler[k], c});
      curves += label + ',' + csv::num(theta1) + ',' + csv::num(idler[k]) + ',' + csv::num(c) + ',' +
                csv::num(c / duration) + ',' + csv::num(expected[k]) + '\n';
    }
    auto fit = analysis::fit_visibility(samples, label);
    summary += label + ',' + csv::num(theta1) + ',' + csv::num(fit.visibility) + ',' + csv::num(fit.uncertainty) +
               ',' + csv::num(fit.phase_offset_deg) + ',' + csv::num(fit.amplitude) + '\n';
    out << "V(" << label << ") = " << fixed(fit.visibility, 4) << " +- " << fixed(fit.uncertainty, 4) << '\n';
    results.push_back(std::move(fit));
  }

  // Fidelity needs exactly the four standard bases, in any order.
  std::array<double, 4> v{}, sigma{};
  std::size_t found = 0;
  for (std::size_t k = 0; k < analysis::kBasisLabels.size(); ++k) {
    for (const auto& r : results) {
      if (r.basis_label == analysis::kBasisLabels[k]) {
        v[k] = r.visibility;
        sigma[k] = r.uncertainty;
        ++found;
        break;
      }
    }
  }
  if (found == 4) {
    const auto f = analysis::fidelity_from_visibilities(v, sigma);
    const double qber = analysis::qber_estimate(f.value);
    summary += "fidelity,," + csv::num(f.value) + ',' + csv::num(f.uncertainty) + ",,\n";
    summary += "qber,," + csv::num(qber) + ',' + csv::num(f.uncertainty) + ",,\n";
    out << "fidelity = " << fixed(f.value, 4) << " +- " << fixed(f.uncertainty, 4) << "\nQBER = " << fixed(qber, 4)
        << '\n';
  }
  write_file(dir / "visibility_curves.csv", curves);
  write_file(dir / "visibility_summary.csv", summary);
}

void cmd_misalign(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto& run = cfg.misalign;
  const double waist = run.beam_waist_um.value_or(source::calibrate_coupler_waist_um(
      source::kCalibrationEdgeDeg, run.lever_arm_mm, source::kCalibrationCoincidenceRetention));
  std::string table =
      "tip_deg,tilt_deg,lateral_offset_mm,coupling,relative_coincidences,relative_heralding,pair_rate,heralding\n";
  double worst = 1.0;
  for (double tip : run.tip_deg.values()) {
    for (double tilt : run.tilt_deg.values()) {
      source::MisalignmentSetting s;
      s.tip_deg = tip;
      s.tilt_deg = tilt;
      s.beam_waist_at_coupler_um = waist;
      s.lever_arm_mm = run.lever_arm_mm;
      s.compensated = run.compensated;
      s.recovery_factor = run.recovery_factor;
      const auto r = source::misalignment_response(s);
      worst = std::min(worst, r.relative_coincidences);
      table += csv::num(tip) + ',' + csv::num(tilt) + ',' + csv::num(r.lateral_offset_mm) + ',' +
               csv::num(r.coupling) + ',' + csv::num(r.relative_coincidences) + ',' +
               csv::num(r.relative_heralding) + ',' + csv::num(run.optimum_pair_rate * r.relative_coincidences) +
               ',' + csv::num(run.optimum_heralding * r.relative_heralding) + '\n';
    }
  }
  write_file(dir / "misalign.csv", table);
  out << (run.compensated ? "compensated" : "uncompensated") << ", coupler waist " << fixed(waist, 1)
      << " um, minimum relative coincidences " << fixed(worst, 4) << '\n';
}

void cmd_stability(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto& run = cfg.stability;
  const auto rates = stats::expected_rates(cfg.sweep_model(), cfg.pump_power_mw);
  stats::BinnedModel bm;
  bm.coincidence_rate = rates.coincidences;
  bm.singles_signal = rates.singles_signal;
  bm.singles_idler = rates.singles_idler;
  bm.pump_power_mw = cfg.pump_power_mw;
  bm.bin_s = run.bin_s;
  bm.n_bins = static_cast<std::size_t>(std::floor(run.duration_s / run.bin_s + 1e-9));
  bm.drift_per_hour = run.drift_per_hour;
  bm.seed = cfg.seed;
  const auto series = stats::simulate_binned_counts(bm);

  if (run.write_series) {
    std::ofstream f(dir / "stability_series.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write stability_series.csv");
    f << "time_s,coincidences,singles_signal,singles_idler,brightness,heralding\n";
    for (std::size_t k = 0; k < bm.n_bins; ++k) {
      f << csv::num(static_cast<double>(k) * bm.bin_s) << ',' << csv::num(series.coincidences[k]) << ','
        << csv::num(series.singles_signal[k]) << ',' << csv::num(series.singles_idler[k]) << ','
        << csv::num(series.brightness[k]) << ',' << csv::num(series.heralding[k]) << '\n';
    }
  }

  const std::pair<const char*, const std::vector<double>*> named[] = {{"coincidences", &series.coincidences},
                                                                      {"singles_signal", &series.singles_signal},
                                                                      {"singles_idler", &series.singles_idler},
                                                                      {"brightness", &series.brightness},
                                                                      {"heralding", &series.heralding}};
  const auto factors = analysis::log_spaced_factors(bm.n_bins);
  std::string slopes = "series,slope,points_used\n";
  for (const auto& [name, data] : named) {
    const analysis::TimeSeries ts{*data, bm.bin_s};
    const auto curve = analysis::allan_deviation(ts, factors);
    write_file(dir / ("allan_" + std::string(name) + ".csv"), curve.csv());
    try {
      const auto fit = analysis::loglog_slope(curve);
      slopes += std::string(name) + ',' + csv::num(fit.slope) + ',' + std::to_string(fit.points_used) + '\n';
      out << name << ": Allan slope " << fixed(fit.slope, 3) << '\n';
    } catch (const DomainError& e) {
      slopes += std::string(name) + ",nan,0\n";
      out << name << ": " << e.what() << '\n';
    }
  }
  write_file(dir / "stability_slopes.csv", slopes);
}

void cmd_ccr(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out,
             const std::optional<std::string>& model) {
  std::vector<std::string> names = model ? std::vector<std::string>{*model} : cfg.ccr.models;
  for (const auto& n : names) optics::ccr_kind_from_string(n);
  const auto angles = cfg.ccr.hwp_deg.values();
  std::string summary = "model,max_abs_ellipticity_deg,max_abs_orientation_error_deg\n";
  for (const auto& n : names) {
    const auto sweep = optics::ccr_polarization_sweep(optics::CcrModel::named(n), angles);
    write_file(dir / ("ccr_" + n + ".csv"), optics::ccr_sweep_csv(sweep));
    double chi = 0, err = 0;
    for (const auto& p : sweep) {
      chi = std::max(chi, std::abs(p.ellipticity_deg));
      err = std::max(err, std::abs(optics::orientation_error_deg(p)));
    }
    summary += n + ',' + csv::num(chi) + ',' + csv::num(err) + '\n';
    out << n << ": max |chi| " << fixed(chi, 3) << " deg, max orientation error " << fixed(err, 3) << " deg\n";
  }
  write_file(dir / "ccr_summary.csv", summary);
}

int run_command(std::string_view command, const RunOptions& options, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  try {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
      throw UsageError("unknown command '" + std::string(command) + "'");
    }
    cfg = ExperimentConfig::load(options.config_path);
    if (options.seed) cfg.seed = *options.seed;
    if (options.ccr_model) {
      if (command != "ccr") throw UsageError("--model applies to the ccr command only");
      optics::ccr_kind_from_string(*options.ccr_model);
    }
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec || !fs::is_directory(options.out_dir)) {
      throw UsageError("cannot create output directory " + options.out_dir.string());
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto& dir = options.out_dir;
    if (command == "state") cmd_state(cfg, dir, out);
    else if (command == "phasematch") cmd_phasematch(cfg, dir, out);
    else if (command == "powersweep") cmd_powersweep(cfg, dir, out);
    else if (command == "visibility") cmd_visibility(cfg, dir, out);
    else if (command == "misalign") cmd_misalign(cfg, dir, out);
    else if (command == "stability") cmd_stability(cfg, dir, out);
    else cmd_ccr(cfg, dir, out, options.ccr_model);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream meta;
  meta << "command=" << command << '\n'
       << "config_hash=" << cfg.hash() << '\n'
       << "seed=" << cfg.seed << '\n'
       << "version=" << FLDI_VERSION << '\n'
       << "wall_time_s=" << fixed(wall, 3) << '\n';
  try {
    write_file(options.out_dir / "run.meta", meta.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fldi::cli
