#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "fldi/config.hpp"
#include "fldi/errors.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::config;

namespace {

std::string location_of(const std::string& text) {
  try {
    ExperimentConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.location();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
  const auto c = ExperimentConfig::parse("{}");
  CHECK(c == ExperimentConfig{});
  CHECK(c.seed == 20240601);
  CHECK(c.pump_power_mw == 0.086);
  CHECK(c.window_ns == 20.0);
}

TEST_CASE("canonical dump round trips") {
  ExperimentConfig c;
  c.seed = 7;
  c.source.dephasing = 0.05;
  c.source.ccr_model = "gold-solid";
  c.source.ccr_entry_orientation_deg = 12.5;
  c.powersweep.powers_mw = {0.1, 0.2};
  const auto text = c.to_json();
  CHECK(text.back() == '\n');
  const auto back = ExperimentConfig::parse(text);
  CHECK(back == c);
  CHECK(back.to_json() == text);
  CHECK(back.hash() == c.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("hash follows content") {
  ExperimentConfig a, b;
  b.seed = a.seed + 1;
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("unknown keys and bad values report their location") {
  CHECK(location_of(R"({"bogus": 1})") == "/bogus");
  CHECK(location_of(R"({"source": {"ccr": {"modle": "ideal"}}})") == "/source/ccr/modle");
  CHECK(location_of(R"({"seed": "x"})") == "/seed");
  CHECK(location_of(R"({"window_ns": -1})") == "/window_ns");
  CHECK(location_of(R"({"visibility": {"idler_step_deg": 120}})") == "/visibility/idler_step_deg");
  CHECK(location_of(R"({"detectors": {"signal": {"efficiency": 1.5}}})") == "/detectors/signal/efficiency");
  CHECK(location_of(R"({"source": {"ccr": {"model": "brass"}}})") == "/source/ccr/model");
  CHECK(location_of(R"({"stability": {"duration_s": 0.5}})") == "/stability/duration_s");
  CHECK(location_of(R"({"powersweep": {"powers_mW": [0.2, -1]}})") != "<none>");
  CHECK(location_of("[1, 2]") != "<none>");
  CHECK(location_of("{ not json") != "<none>");
}

TEST_CASE("shipped configs parse and validate") {
  for (const char* name : {"default.json", "calibrated.json"}) {
    const auto path = test::source_dir() / "configs" / name;
    const auto c = ExperimentConfig::load(path);
    CHECK_NOTHROW(c.validate());
    CHECK_NOTHROW(c.crystal_spec());
  }
  const auto def = ExperimentConfig::load(test::source_dir() / "configs" / "default.json");
  CHECK(def == ExperimentConfig{});
  const auto cal = ExperimentConfig::load(test::source_dir() / "configs" / "calibrated.json");
  CHECK(cal.source.dephasing == doctest::Approx(0.0839));
}

TEST_CASE("load errors name the file") {
  const auto dir = test::scratch_dir("config_load");
  const auto path = dir / "bad.json";
  std::ofstream(path) << R"({"seed": -3})";
  try {
    ExperimentConfig::load(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
  }
  CHECK_THROWS_AS(ExperimentConfig::load(dir / "missing.json"), ConfigError);
}

TEST_CASE("grids are inclusive") {
  const Grid g{15, 45, 1};
  const auto v = g.values();
  CHECK(v.size() == 31);
  CHECK(v.front() == 15);
  CHECK(v.back() == doctest::Approx(45));
  const Grid one{0, 0, 1};
  CHECK(one.values().size() == 1);
}
