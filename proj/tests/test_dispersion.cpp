#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fldi/dispersion.hpp"
#include "fldi/errors.hpp"
#include "support.hpp"

using namespace fldi;
using namespace fldi::qpm;

namespace {

// Direct evaluation of the documented formula from the shipped data file.
struct Oracle {
  std::vector<double> c;

  double operator()(double lambda_nm, double t) const {
    const double l = lambda_nm * 1e-3, l2 = l * l;
    const double n0 = std::sqrt(c[0] + c[1] / (1 - c[2] / l2) + c[3] / (1 - c[4] / l2) - c[5] * l2);
    double n1 = 0, n2 = 0;
    for (int m = 0; m < 4; ++m) {
      n1 += c[6 + m] / std::pow(l, m);
      n2 += c[10 + m] / std::pow(l, m);
    }
    const double dt = t - 25.0;
    return n0 + n1 * dt + n2 * dt * dt;
  }
};

std::string data_file() {
  std::ifstream in(test::source_dir() / "data" / "ktp_z_fradkin_emanueli.json");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("built-in KTP set matches the shipped data file") {
  const auto file = DispersionModel::from_json(data_file());
  const auto builtin = DispersionModel::ktp_z();
  CHECK(file.coefficients == builtin.coefficients);
  CHECK(file.lambda_min_nm == builtin.lambda_min_nm);
  CHECK(file.temp_max_c == builtin.temp_max_c);
}

TEST_CASE("refractive index agrees with a direct formula evaluation") {
  const Oracle oracle{nlohmann::json::parse(data_file()).at("coefficients").get<std::vector<double>>()};
  const auto m = DispersionModel::ktp_z();
  test::Gen g(31);
  for (int k = 0; k < 200; ++k) {
    const double l = g.uniform(380, 1600), t = g.uniform(0, 150);
    CHECK(refractive_index(m, l, t) == doctest::Approx(oracle(l, t)).epsilon(1e-13));
  }
  CHECK(refractive_index(m, 1064, 25) == doctest::Approx(1.8302).epsilon(1e-4));
}

TEST_CASE("normal dispersion and positive thermo-optic slope across the range") {
  const auto m = DispersionModel::ktp_z();
  for (double t = 0; t < 150; t += 25) {
    for (double l = 380; l < 1600; l += 20) {
      CHECK(refractive_index(m, l + 20, t) < refractive_index(m, l, t));
      CHECK(refractive_index(m, l, t + 1) > refractive_index(m, l, t));
    }
  }
}

TEST_CASE("out-of-range inputs name the violated bound") {
  const auto m = DispersionModel::ktp_z();
  try {
    refractive_index(m, 350, 25);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("below lower bound") != std::string::npos);
  }
  CHECK_THROWS_AS(refractive_index(m, 1700, 25), RangeError);
  CHECK_THROWS_AS(refractive_index(m, 800, -5), RangeError);
  CHECK_THROWS_AS(refractive_index(m, 800, 151), RangeError);
}

TEST_CASE("JSON round trip and strict keys") {
  const auto m = DispersionModel::ktp_z();
  const auto back = DispersionModel::from_json(m.to_json());
  CHECK(back.coefficients == m.coefficients);
  CHECK(back.name == m.name);
  auto j = nlohmann::json::parse(m.to_json());
  j["extra"] = 1;
  CHECK_THROWS_AS(DispersionModel::from_json(j.dump()), ConfigError);
  j.erase("extra");
  j["coefficients"] = std::vector<double>{1, 2, 3};
  CHECK_THROWS(DispersionModel::from_json(j.dump()));
  CHECK_THROWS_AS(DispersionModel::from_json("{not json"), DataError);
}
