#include "fldi/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fldi/ccr.hpp"
#include "fldi/errors.hpp"

namespace fldi::config {
namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

// Typed view of one JSON object that remembers which keys were read.
class Reader {
 public:
  Reader(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ConfigError(where(), "expected an object");
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return ptr_.empty() ? "/" : ptr_;
    return ptr_ + "/" + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) out = as_number(*v, where(key));
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const auto* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else {
        out = as_number(*v, where(key));
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) throw ConfigError(where(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], where(key) + "/" + std::to_string(i)));
    }
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) throw ConfigError(where(key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) throw ConfigError(where(key) + "/" + std::to_string(i), "expected a string");
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  template <typename Fn>
  void object(const std::string& key, Fn fn) {
    if (const auto* v = find(key)) {
      Reader sub(*v, where(key));
      fn(sub);
      sub.finish();
    }
  }

  void grid(const std::string& key, Grid& g) {
    object(key, [&](Reader& r) {
      r.number("start", g.start);
      r.number("stop", g.stop);
      r.number("step", g.step);
    });
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()), "unknown key");
    }
  }

 private:
  static double as_number(const json& v, const std::string& at) {
    if (!v.is_number()) throw ConfigError(at, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at, "expected a finite number");
    return x;
  }

  const json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

void read_detector(Reader& r, stats::DetectorModel& d) {
  r.number("efficiency", d.efficiency);
  r.number("dark_rate_cps", d.dark_rate);
  r.number("jitter_sigma_ps", d.jitter_sigma_ps);
  r.number("dead_time_ns", d.dead_time_ns);
}

ordered detector_json(const stats::DetectorModel& d) {
  ordered j;
  j["efficiency"] = d.efficiency;
  j["dark_rate_cps"] = d.dark_rate;
  j["jitter_sigma_ps"] = d.jitter_sigma_ps;
  j["dead_time_ns"] = d.dead_time_ns;
  return j;
}

ordered grid_json(const Grid& g) {
  ordered j;
  j["start"] = g.start;
  j["stop"] = g.stop;
  j["step"] = g.step;
  return j;
}

ordered optional_json(const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); }

void check(bool ok, const std::string& where, const std::string& msg) {
  if (!ok) throw ConfigError(where, msg);
}

void check_grid(const Grid& g, const std::string& where) {
  check(g.step > 0, where + "/step", "must be positive");
  check(g.stop >= g.start, where + "/stop", "must not be below start");
  check((g.stop - g.start) / g.step < 1e6, where, "grid has too many points");
}

// Re-raise model validation errors at a config location.
template <typename Fn>
void at(const std::string& where, Fn fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where, e.what());
  }
}

}  // namespace

std::vector<double> Grid::values() const {
  if (!(step > 0) || stop < start) throw DomainError("invalid grid");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = start + static_cast<double>(k) * step;
  return v;
}

source::SourceConfig SourceBlock::to_source_config() const {
  source::SourceConfig s;
  const double a = units::deg_to_rad(pump_angle_deg);
  s.pump_polarization = optics::PolarizationState<double>(std::complex<double>(std::cos(a)),
                                                          std::polar(std::sin(a), pump_phase_rad));
  s.lcvr_phase_rad = lcvr_phase_rad;
  s.ccr = optics::CcrModel::named(ccr_model);
  s.ccr.entry_orientation_deg = ccr_entry_orientation_deg;
  s.bd_split_ratio_error = bd_split_ratio_error;
  s.dephasing = dephasing;
  s.pass_gain = pass_gain;
  return s;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  Reader r(j, "");
  r.unsigned64("seed", c.seed);
  r.number("pump_power_mW", c.pump_power_mw);
  r.number("window_ns", c.window_ns);
  r.object("source", [&](Reader& s) {
    auto& b = c.source;
    s.number("pump_angle_deg", b.pump_angle_deg);
    s.number("pump_phase_rad", b.pump_phase_rad);
    s.number("lcvr_phase_rad", b.lcvr_phase_rad);
    s.object("ccr", [&](Reader& k) {
      k.string("model", b.ccr_model);
      k.optional_number("entry_orientation_deg", b.ccr_entry_orientation_deg);
    });
    s.number("bd_split_ratio_error", b.bd_split_ratio_error);
    s.number("dephasing", b.dephasing);
    s.number("pass_gain", b.pass_gain);
    s.number("pair_generation_rate_per_mW", b.pair_generation_rate_per_mw);
    s.number("multipair_coherence_ps", b.multipair_coherence_ps);
  });
  r.object("crystal", [&](Reader& s) {
    s.number("poling_period_um", c.crystal.poling_period_um);
    s.number("length_mm", c.crystal.length_mm);
    s.number("temperature_C", c.crystal.temperature_c);
    s.string("dispersion", c.crystal.dispersion);
  });
  r.object("detectors", [&](Reader& s) {
    s.object("signal", [&](Reader& d) { read_detector(d, c.signal_detector); });
    s.object("idler", [&](Reader& d) { read_detector(d, c.idler_detector); });
  });
  r.object("phasematch", [&](Reader& s) {
    auto& b = c.phasematch;
    s.grid("pump_nm", b.pump_nm);
    s.grid("temp_C", b.temp_c);
    s.string("observable", b.observable);
    s.number("band_center_nm", b.band_center_nm);
    s.number("band_width_nm", b.band_width_nm);
    s.number("window_half_width_nm", b.window_half_width_nm);
    s.number("resolution_nm", b.resolution_nm);
    s.boolean("double_pass", b.double_pass);
  });
  r.object("powersweep", [&](Reader& s) {
    s.numbers("powers_mW", c.powersweep.powers_mw);
    s.number("duration_s", c.powersweep.duration_s);
    s.number("filter_transmission", c.powersweep.filter_transmission);
  });
  r.object("visibility", [&](Reader& s) {
    s.numbers("signal_angles_deg", c.visibility.signal_angles_deg);
    s.number("idler_step_deg", c.visibility.idler_step_deg);
    s.number("pairs_per_point", c.visibility.pairs_per_point);
    s.number("pump_power_mW", c.visibility.pump_power_mw);
  });
  r.object("misalign", [&](Reader& s) {
    auto& b = c.misalign;
    s.grid("tip_deg", b.tip_deg);
    s.grid("tilt_deg", b.tilt_deg);
    s.boolean("compensated", b.compensated);
    s.number("lever_arm_mm", b.lever_arm_mm);
    s.number("recovery_factor", b.recovery_factor);
    s.optional_number("beam_waist_um", b.beam_waist_um);
    s.number("optimum_pair_rate", b.optimum_pair_rate);
    s.number("optimum_heralding", b.optimum_heralding);
  });
  r.object("stability", [&](Reader& s) {
    s.number("duration_s", c.stability.duration_s);
    s.number("bin_s", c.stability.bin_s);
    s.number("drift_per_hour", c.stability.drift_per_hour);
    s.boolean("write_series", c.stability.write_series);
  });
  r.object("ccr", [&](Reader& s) {
    s.strings("models", c.ccr.models);
    s.grid("hwp_deg", c.ccr.hwp_deg);
  });
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("/", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  }
}

std::string ExperimentConfig::to_json() const {
  ordered j;
  j["seed"] = seed;
  j["pump_power_mW"] = pump_power_mw;
  j["window_ns"] = window_ns;

  ordered s;
  s["pump_angle_deg"] = source.pump_angle_deg;
  s["pump_phase_rad"] = source.pump_phase_rad;
  s["lcvr_phase_rad"] = source.lcvr_phase_rad;
  s["ccr"] = ordered{{"model", source.ccr_model}, {"entry_orientation_deg", optional_json(source.ccr_entry_orientation_deg)}};
  s["bd_split_ratio_error"] = source.bd_split_ratio_error;
  s["dephasing"] = source.dephasing;
  s["pass_gain"] = source.pass_gain;
  s["pair_generation_rate_per_mW"] = source.pair_generation_rate_per_mw;
  s["multipair_coherence_ps"] = source.multipair_coherence_ps;
  j["source"] = s;

  ordered cr;
  cr["poling_period_um"] = crystal.poling_period_um;
  cr["length_mm"] = crystal.length_mm;
  cr["temperature_C"] = crystal.temperature_c;
  cr["dispersion"] = crystal.dispersion;
  j["crystal"] = cr;

  ordered det;
  det["signal"] = detector_json(signal_detector);
  det["idler"] = detector_json(idler_detector);
  j["detectors"] = det;

  ordered pm;
  pm["pump_nm"] = grid_json(phasematch.pump_nm);
  pm["temp_C"] = grid_json(phasematch.temp_c);
  pm["observable"] = phasematch.observable;
  pm["band_center_nm"] = phasematch.band_center_nm;
  pm["band_width_nm"] = phasematch.band_width_nm;
  pm["window_half_width_nm"] = phasematch.window_half_width_nm;
  pm["resolution_nm"] = phasematch.resolution_nm;
  pm["double_pass"] = phasematch.double_pass;
  j["phasematch"] = pm;

  ordered ps;
  ps["powers_mW"] = powersweep.powers_mw;
  ps["duration_s"] = powersweep.duration_s;
  ps["filter_transmission"] = powersweep.filter_transmission;
  j["powersweep"] = ps;

  ordered vis;
  vis["signal_angles_deg"] = visibility.signal_angles_deg;
  vis["idler_step_deg"] = visibility.idler_step_deg;
  vis["pairs_per_point"] = visibility.pairs_per_point;
  vis["pump_power_mW"] = visibility.pump_power_mw;
  j["visibility"] = vis;

  ordered mis;
  mis["tip_deg"] = grid_json(misalign.tip_deg);
  mis["tilt_deg"] = grid_json(misalign.tilt_deg);
  mis["compensated"] = misalign.compensated;
  mis["lever_arm_mm"] = misalign.lever_arm_mm;
  mis["recovery_factor"] = misalign.recovery_factor;
  mis["beam_waist_um"] = optional_json(misalign.beam_waist_um);
  mis["optimum_pair_rate"] = misalign.optimum_pair_rate;
  mis["optimum_heralding"] = misalign.optimum_heralding;
  j["misalign"] = mis;

  ordered st;
  st["duration_s"] = stability.duration_s;
  st["bin_s"] = stability.bin_s;
  st["drift_per_hour"] = stability.drift_per_hour;
  st["write_series"] = stability.write_series;
  j["stability"] = st;

  ordered cc;
  cc["models"] = ccr.models;
  cc["hwp_deg"] = grid_json(ccr.hwp_deg);
  j["ccr"] = cc;

  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json())));
  return buf;
}

void ExperimentConfig::validate() const {
  check(pump_power_mw > 0, "/pump_power_mW", "must be positive");
  check(window_ns > 0, "/window_ns", "must be positive");

  check(source.pair_generation_rate_per_mw >= 0, "/source/pair_generation_rate_per_mW", "must be non-negative");
  check(source.multipair_coherence_ps >= 0, "/source/multipair_coherence_ps", "must be non-negative");
  at("/source/ccr/model", [&] { optics::ccr_kind_from_string(source.ccr_model); });
  at("/source", [&] { source.to_source_config().validate(); });

  at("/crystal", [&] { crystal_spec(); });
  for (const auto& [d, base] : {std::pair{&signal_detector, std::string("/detectors/signal")},
                                 std::pair{&idler_detector, std::string("/detectors/idler")}}) {
    check(d->efficiency >= 0 && d->efficiency <= 1, base + "/efficiency", "must lie in [0, 1]");
    check(d->dark_rate >= 0, base + "/dark_rate_cps", "must be non-negative");
    check(d->jitter_sigma_ps >= 0, base + "/jitter_sigma_ps", "must be non-negative");
    check(d->dead_time_ns >= 0, base + "/dead_time_ns", "must be non-negative");
  }

  const auto& pm = phasematch;
  check_grid(pm.pump_nm, "/phasematch/pump_nm");
  check_grid(pm.temp_c, "/phasematch/temp_C");
  check(pm.observable == "pair-rate" || pm.observable == "heralding", "/phasematch/observable",
        "must be \"pair-rate\" or \"heralding\"");
  check(pm.band_width_nm > 0, "/phasematch/band_width_nm", "must be positive");
  check(pm.window_half_width_nm > 0, "/phasematch/window_half_width_nm", "must be positive");
  check(pm.resolution_nm > 0, "/phasematch/resolution_nm", "must be positive");

  const auto& ps = powersweep.powers_mw;
  check(!ps.empty(), "/powersweep/powers_mW", "must not be empty");
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const auto where = "/powersweep/powers_mW/" + std::to_string(k);
    check(ps[k] > 0, where, "pump power must be positive");
    check(k == 0 || ps[k] > ps[k - 1], where, "pump powers must be ascending");
  }
  check(powersweep.duration_s > 0, "/powersweep/duration_s", "must be positive");
  check(powersweep.filter_transmission >= 0 && powersweep.filter_transmission <= 1,
        "/powersweep/filter_transmission", "must lie in [0, 1]");

  check(!visibility.signal_angles_deg.empty(), "/visibility/signal_angles_deg", "must not be empty");
  check(visibility.idler_step_deg > 0 && visibility.idler_step_deg <= 90, "/visibility/idler_step_deg",
        "must lie in (0, 90]");
  check(visibility.pairs_per_point > 0, "/visibility/pairs_per_point", "must be positive");
  check(visibility.pump_power_mw > 0, "/visibility/pump_power_mW", "must be positive");

  check_grid(misalign.tip_deg, "/misalign/tip_deg");
  check_grid(misalign.tilt_deg, "/misalign/tilt_deg");
  check(misalign.lever_arm_mm > 0, "/misalign/lever_arm_mm", "must be positive");
  check(misalign.recovery_factor >= 0 && misalign.recovery_factor <= 1, "/misalign/recovery_factor",
        "must lie in [0, 1]");
  check(!misalign.beam_waist_um || *misalign.beam_waist_um > 0, "/misalign/beam_waist_um", "must be positive");
  check(misalign.optimum_pair_rate >= 0, "/misalign/optimum_pair_rate", "must be non-negative");
  check(misalign.optimum_heralding >= 0 && misalign.optimum_heralding <= 1, "/misalign/optimum_heralding",
        "must lie in [0, 1]");

  check(stability.bin_s > 0, "/stability/bin_s", "must be positive");
  check(stability.duration_s >= 100 * stability.bin_s, "/stability/duration_s",
        "must be at least 100 sample intervals");
  check(stability.duration_s / stability.bin_s <= 1e8, "/stability/duration_s", "too many samples");

  check(!ccr.models.empty(), "/ccr/models", "must not be empty");
  for (std::size_t k = 0; k < ccr.models.size(); ++k) {
    at("/ccr/models/" + std::to_string(k), [&] { optics::ccr_kind_from_string(ccr.models[k]); });
  }
  check_grid(ccr.hwp_deg, "/ccr/hwp_deg");
}

qpm::CrystalSpec ExperimentConfig::crystal_spec() const {
  qpm::CrystalSpec spec;
  spec.poling_period_um = crystal.poling_period_um;
  spec.length_mm = crystal.length_mm;
  spec.temperature_c = crystal.temperature_c;
  if (crystal.dispersion != "builtin") {
    std::filesystem::path p(crystal.dispersion);
    if (p.is_relative()) p = base_dir / p;
    spec.dispersion = qpm::DispersionModel::load(p);
  }
  spec.validate();
  return spec;
}

stats::PowerSweepModel ExperimentConfig::sweep_model() const {
  stats::PowerSweepModel m;
  m.source_brightness = source.pair_generation_rate_per_mw;
  m.state = source::trace_paths(source.to_source_config());
  m.signal_detector = signal_detector;
  m.idler_detector = idler_detector;
  m.multipair_coherence_ps = source.multipair_coherence_ps;
  m.filter_transmission = powersweep.filter_transmission;
  m.window_ns = window_ns;
  m.duration_s = powersweep.duration_s;
  m.seed = seed;
  return m;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const auto det_eq = [](const stats::DetectorModel& a, const stats::DetectorModel& b) {
    return a.efficiency == b.efficiency && a.dark_rate == b.dark_rate && a.jitter_sigma_ps == b.jitter_sigma_ps &&
           a.dead_time_ns == b.dead_time_ns;
  };
  return seed == o.seed && pump_power_mw == o.pump_power_mw && window_ns == o.window_ns && source == o.source &&
         crystal == o.crystal && det_eq(signal_detector, o.signal_detector) &&
         det_eq(idler_detector, o.idler_detector) && phasematch == o.phasematch && powersweep == o.powersweep &&
         visibility == o.visibility && misalign == o.misalign && stability == o.stability && ccr == o.ccr;
}

}  // namespace fldi::config
